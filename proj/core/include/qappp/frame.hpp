#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace qappp {

// Column-oriented table with string and numeric columns. This is the
// carrier between feature extraction, design-matrix construction, and
// evaluation; CSV with a header row on disk.
class Frame {
public:
    using StringColumn = std::vector<std::string>;
    using NumericColumn = std::vector<double>;
    using Column = std::variant<StringColumn, NumericColumn>;

    Frame() = default;

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return names_.size(); }
    const std::vector<std::string>& column_names() const { return names_; }

    bool has_column(const std::string& name) const;
    bool is_numeric(const std::string& name) const;

    void add_string_column(const std::string& name, StringColumn values);
    void add_numeric_column(const std::string& name, NumericColumn values);

    const StringColumn& strings(const std::string& name) const;
    const NumericColumn& numbers(const std::string& name) const;

    // Replaces the values of an existing numeric column.
    void set_numeric_column(const std::string& name, NumericColumn values);

    void rename_column(const std::string& from, const std::string& to);

    // New frame holding the given rows (in the given order).
    Frame select_rows(const std::vector<std::size_t>& rows) const;

    // CSV round-trip. Columns whose every non-empty cell parses as a
    // double become numeric; everything else stays a string column.
    static Frame from_csv(const std::filesystem::path& path);
    static Frame from_csv_text(const std::string& text);
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;

private:
    const Column& column(const std::string& name) const;
    Column& column(const std::string& name);

    std::vector<std::string> names_;
    std::map<std::string, Column> columns_;
    std::size_t n_rows_ = 0;
};

}  // namespace qappp
