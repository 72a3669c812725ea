#include "polyexcess/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace polyexcess::csv {

namespace {

std::string_view strip(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() &&
           (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

template <typename T>
T parse_number(std::string_view text, const char* what) {
    const auto s = strip(text);
    T value{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (s.empty() || ec != std::errc{} || ptr != end) {
        throw std::invalid_argument(std::string{"not "} + what + ": '" + std::string{text} + "'");
    }
    return value;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line, char delimiter) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

Reader::Reader(std::istream& in, char delimiter) : in_{in}, delimiter_{delimiter} {
    if (!in_) {
        throw std::runtime_error("unreadable input stream");
    }
    std::string line;
    while (std::getline(in_, line)) {
        if (!strip(line).empty()) {
            // A UTF-8 byte order mark would otherwise become part of the first column name.
            if (line.rfind("\xEF\xBB\xBF", 0) == 0) {
                line.erase(0, 3);
            }
            header_ = split_line(line, delimiter_);
            for (auto& h : header_) {
                h = std::string{strip(h)};
            }
            return;
        }
    }
    if (in_.bad()) {
        throw std::runtime_error("unreadable input stream");
    }
    throw std::runtime_error("input has no header line");
}

std::optional<std::size_t> Reader::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t Reader::require_column(std::string_view name) const {
    if (auto idx = column(name)) {
        return *idx;
    }
    throw std::runtime_error("missing column '" + std::string{name} + "'");
}

bool Reader::next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        ++row_;
        if (strip(line).empty()) {
            continue;
        }
        fields = split_line(line, delimiter_);
        return true;
    }
    if (in_.bad()) {
        throw std::runtime_error("read error after row " + std::to_string(row_));
    }
    return false;
}

std::string escape(std::string_view field, char delimiter) {
    if (field.find_first_of(std::string{delimiter} + "\"\n\r") == std::string_view::npos) {
        return std::string{field};
    }
    std::string out{"\""};
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw std::runtime_error("failed to format double");
    }
    return std::string(buf, ptr);
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out << delimiter;
        }
        out << escape(fields[i], delimiter);
    }
    out << '\n';
}

int parse_int(std::string_view text) { return parse_number<int>(text, "an integer"); }

long long parse_int64(std::string_view text) {
    return parse_number<long long>(text, "an integer");
}

double parse_double(std::string_view text) {
    const auto s = strip(text);
    if (s == "nan" || s == "NaN") {
        return std::nan("");
    }
    return parse_number<double>(s, "a number");
}

}  // namespace polyexcess::csv
