#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace qappp {

// FNV-1a 64-bit. Used for cache keys, manifest digests, and the
// deterministic answer stub. Not cryptographic.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 14695981039346656037ull) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Replaces every occurrence of `needle` in `haystack`.
std::string replace_all(std::string_view haystack, std::string_view needle,
                        std::string_view replacement);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// Shortest decimal form that round-trips a double. Stable across runs of
// the same build; used for every numeric artifact the pipeline writes.
std::string format_double(double v);

// Reads a whole file; throws UnreadableFile.
std::string read_file(const std::filesystem::path& path);

// Write-then-rename so readers never observe a partial artifact.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t file_digest(const std::filesystem::path& path);

}  // namespace qappp
