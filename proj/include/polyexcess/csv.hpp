#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace polyexcess::csv {

/// Splits one delimited line. Double-quoted fields may contain the delimiter
/// and escaped quotes ("").
[[nodiscard]] std::vector<std::string> split_line(std::string_view line, char delimiter = ',');

/// Row-at-a-time reader keyed by the header line.
class Reader {
public:
    Reader(std::istream& in, char delimiter = ',');

    [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }

    /// Position of `name` in the header, or nullopt.
    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;

    /// Position of `name`; throws std::runtime_error naming the column if absent.
    [[nodiscard]] std::size_t require_column(std::string_view name) const;

    /// Reads the next non-blank row into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number of the most recent row, counted after the header.
    /// Blank lines count so the number matches the file.
    [[nodiscard]] std::size_t row_number() const noexcept { return row_; }

private:
    std::istream& in_;
    char delimiter_;
    std::vector<std::string> header_;
    std::size_t row_ = 0;
};

/// Quotes a field only when it contains the delimiter, a quote or a newline.
[[nodiscard]] std::string escape(std::string_view field, char delimiter = ',');

/// Shortest decimal text that round-trips to the same double.
[[nodiscard]] std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

[[nodiscard]] int parse_int(std::string_view text);
[[nodiscard]] long long parse_int64(std::string_view text);
[[nodiscard]] double parse_double(std::string_view text);

}  // namespace polyexcess::csv
