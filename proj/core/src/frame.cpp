#include "qappp/frame.hpp"

#include <cstdlib>
#include <stdexcept>

#include "qappp/error.hpp"
#include "qappp/util.hpp"

namespace qappp {

namespace {

bool parses_as_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// Minimal RFC-4180 reader: quoted fields, doubled quotes, LF or CRLF rows.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': in_quotes = true; row_started = true; break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_started = true;
                break;
            case '\r': break;
            case '\n':
                if (row_started || !field.empty() || !row.empty()) {
                    row.push_back(std::move(field));
                    field.clear();
                    rows.push_back(std::move(row));
                    row.clear();
                }
                row_started = false;
                break;
            default: field += c; row_started = true; break;
        }
    }
    if (row_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

bool Frame::has_column(const std::string& name) const {
    return columns_.count(name) != 0;
}

bool Frame::is_numeric(const std::string& name) const {
    return std::holds_alternative<NumericColumn>(column(name));
}

const Frame::Column& Frame::column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw MissingVariable("no such column: " + name);
    return it->second;
}

Frame::Column& Frame::column(const std::string& name) {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw MissingVariable("no such column: " + name);
    return it->second;
}

void Frame::add_string_column(const std::string& name, StringColumn values) {
    if (!names_.empty() && values.size() != n_rows_)
        throw std::invalid_argument("column length mismatch for " + name);
    if (columns_.count(name)) throw std::invalid_argument("duplicate column " + name);
    n_rows_ = values.size();
    names_.push_back(name);
    columns_.emplace(name, std::move(values));
}

void Frame::add_numeric_column(const std::string& name, NumericColumn values) {
    if (!names_.empty() && values.size() != n_rows_)
        throw std::invalid_argument("column length mismatch for " + name);
    if (columns_.count(name)) throw std::invalid_argument("duplicate column " + name);
    n_rows_ = values.size();
    names_.push_back(name);
    columns_.emplace(name, std::move(values));
}

const Frame::StringColumn& Frame::strings(const std::string& name) const {
    const Column& col = column(name);
    if (!std::holds_alternative<StringColumn>(col))
        throw NonNumericVariable("column is numeric, not string: " + name);
    return std::get<StringColumn>(col);
}

const Frame::NumericColumn& Frame::numbers(const std::string& name) const {
    const Column& col = column(name);
    if (!std::holds_alternative<NumericColumn>(col))
        throw NonNumericVariable("column is not numeric: " + name);
    return std::get<NumericColumn>(col);
}

void Frame::set_numeric_column(const std::string& name, NumericColumn values) {
    Column& col = column(name);
    if (!std::holds_alternative<NumericColumn>(col))
        throw NonNumericVariable("column is not numeric: " + name);
    if (values.size() != n_rows_)
        throw std::invalid_argument("column length mismatch for " + name);
    col = std::move(values);
}

void Frame::rename_column(const std::string& from, const std::string& to) {
    if (from == to) return;
    auto it = columns_.find(from);
    if (it == columns_.end()) throw MissingVariable("no such column: " + from);
    if (columns_.count(to)) throw std::invalid_argument("duplicate column " + to);
    columns_.emplace(to, std::move(it->second));
    columns_.erase(it);
    for (auto& n : names_)
        if (n == from) n = to;
}

Frame Frame::select_rows(const std::vector<std::size_t>& rows) const {
    Frame out;
    for (const auto& name : names_) {
        const Column& col = columns_.at(name);
        if (std::holds_alternative<StringColumn>(col)) {
            const auto& src = std::get<StringColumn>(col);
            StringColumn dst;
            dst.reserve(rows.size());
            for (std::size_t r : rows) dst.push_back(src.at(r));
            out.add_string_column(name, std::move(dst));
        } else {
            const auto& src = std::get<NumericColumn>(col);
            NumericColumn dst;
            dst.reserve(rows.size());
            for (std::size_t r : rows) dst.push_back(src.at(r));
            out.add_numeric_column(name, std::move(dst));
        }
    }
    return out;
}

Frame Frame::from_csv(const std::filesystem::path& path) {
    return from_csv_text(read_file(path));
}

Frame Frame::from_csv_text(const std::string& text) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw UnreadableFile("empty CSV");
    const auto& header = rows.front();
    const std::size_t n_cols = header.size();
    const std::size_t n_rows = rows.size() - 1;

    Frame out;
    for (std::size_t c = 0; c < n_cols; ++c) {
        bool numeric = n_rows > 0;
        double tmp;
        for (std::size_t r = 1; r <= n_rows && numeric; ++r) {
            if (rows[r].size() != n_cols)
                throw UnreadableFile("CSV row " + std::to_string(r + 1) +
                                     " has " + std::to_string(rows[r].size()) +
                                     " fields, expected " + std::to_string(n_cols));
            if (!parses_as_double(rows[r][c], tmp)) numeric = false;
        }
        if (numeric) {
            NumericColumn col(n_rows);
            for (std::size_t r = 1; r <= n_rows; ++r)
                col[r - 1] = std::strtod(rows[r][c].c_str(), nullptr);
            out.add_numeric_column(header[c], std::move(col));
        } else {
            StringColumn col(n_rows);
            for (std::size_t r = 1; r <= n_rows; ++r) {
                if (rows[r].size() != n_cols)
                    throw UnreadableFile("ragged CSV row " + std::to_string(r + 1));
                col[r - 1] = rows[r][c];
            }
            out.add_string_column(header[c], std::move(col));
        }
    }
    return out;
}

std::string Frame::to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < names_.size(); ++c) {
        if (c) out += ',';
        out += csv_escape(names_[c]);
    }
    out += '\n';
    for (std::size_t r = 0; r < n_rows_; ++r) {
        for (std::size_t c = 0; c < names_.size(); ++c) {
            if (c) out += ',';
            const Column& col = columns_.at(names_[c]);
            if (std::holds_alternative<StringColumn>(col))
                out += csv_escape(std::get<StringColumn>(col)[r]);
            else
                out += format_double(std::get<NumericColumn>(col)[r]);
        }
        out += '\n';
    }
    return out;
}

void Frame::write_csv(const std::filesystem::path& path) const {
    atomic_write_file(path, to_csv());
}

}  // namespace qappp
