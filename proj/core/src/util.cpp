#include "qappp/util.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

#include "qappp/error.hpp"

namespace qappp {

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string replace_all(std::string_view haystack, std::string_view needle,
                        std::string_view replacement) {
    if (needle.empty()) return std::string(haystack);
    std::string out;
    out.reserve(haystack.size());
    std::size_t pos = 0;
    while (true) {
        std::size_t hit = haystack.find(needle, pos);
        if (hit == std::string_view::npos) break;
        out.append(haystack.substr(pos, hit - pos));
        out.append(replacement);
        pos = hit + needle.size();
    }
    out.append(haystack.substr(pos));
    return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return 0;
    std::size_t n = 0, pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

std::string format_double(double v) {
    // %.15g first: it round-trips most values and avoids noise digits.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    if (std::strtod(buf, nullptr) == v) return buf;
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw UnreadableFile("read failed: " + path.string());
    return ss.str();
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UnreadableFile("cannot open file for write: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw UnreadableFile("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::uint64_t file_digest(const std::filesystem::path& path) {
    return fnv1a64(read_file(path));
}

}  // namespace qappp
