#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rtoi/core/error.hpp"

namespace rtoi::csv {

// Maps canonical column names (e.g. "price") to the names used in a given
// file's header. Unmapped canonical names are looked up verbatim.
struct Schema {
    std::map<std::string, std::string> rename;

    const std::string& column(const std::string& canonical) const {
        auto it = rename.find(canonical);
        return it == rename.end() ? canonical : it->second;
    }
};

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// Quote-aware split for lines holding '"'. Quoted fields are unescaped in
// place, so the views point into `line`, which must outlive them.
inline std::vector<std::string_view> split_quoted(std::string& line, std::size_t line_no) {
    std::vector<std::string_view> out;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t r = 0, w = 0;
    const std::size_t n = line.size();
    while (true) {
        const std::size_t start = w;
        if (r < n && line[r] == '"') {
            ++r;
            while (true) {
                if (r >= n) throw DataError("Malformed", "unterminated quoted field", line_no);
                if (line[r] == '"') {
                    if (r + 1 < n && line[r + 1] == '"') {
                        line[w++] = '"';
                        r += 2;
                        continue;
                    }
                    ++r;
                    break;
                }
                line[w++] = line[r++];
            }
            if (r < n && line[r] != ',') throw DataError("Malformed", "text after a closing quote", line_no);
        } else {
            while (r < n && line[r] != ',') line[w++] = line[r++];
        }
        spans.emplace_back(start, w - start);
        if (r >= n) break;
        ++r;  // the comma
    }
    for (auto [a, len] : spans) out.emplace_back(line.data() + a, len);
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Headered, comma-separated reader. Blank lines are skipped; line numbers
// are 1-based and count the header.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {
        std::string header;
        while (std::getline(in_, header)) {
            ++line_no_;
            if (!trim(header).empty()) {
                for (auto f : split(trim(header))) header_.emplace_back(trim(f));
                has_header_ = true;
                break;
            }
        }
    }

    bool empty_input() const { return !has_header_; }
    const std::vector<std::string>& header() const { return header_; }

    std::optional<std::size_t> find(const std::string& name) const {
        for (std::size_t i = 0; i < header_.size(); ++i) {
            if (header_[i] == name) return i;
        }
        return std::nullopt;
    }

    std::size_t require(const std::string& name) const {
        auto idx = find(name);
        if (!idx) throw DataError("MissingColumn", "required column '" + name + "' not in header", 1);
        return *idx;
    }

    // Returns false at end of input. Fields are views into an internal
    // buffer valid until the next call.
    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in_, buf_)) {
            ++line_no_;
            std::string_view line = trim(buf_);
            if (line.empty()) continue;
            if (line.find('"') == std::string_view::npos) {
                fields = split(line);
            } else {
                buf_ = std::string(line);
                fields = split_quoted(buf_, line_no_);
            }
            for (auto& f : fields) f = trim(f);
            if (fields.size() != header_.size()) {
                throw DataError("Malformed",
                                "expected " + std::to_string(header_.size()) + " fields, got " +
                                    std::to_string(fields.size()),
                                line_no_);
            }
            return true;
        }
        return false;
    }

    std::size_t line() const { return line_no_; }

private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::string buf_;
    std::size_t line_no_ = 0;
    bool has_header_ = false;
};

inline std::int64_t parse_int(std::string_view s, std::size_t line, const char* what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
        throw DataError("Malformed", std::string("invalid ") + what + " '" + std::string(s) + "'", line);
    }
    return v;
}

inline double parse_double(std::string_view s, std::size_t line, const char* what) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
        throw DataError("Malformed", std::string("invalid ") + what + " '" + std::string(s) + "'", line);
    }
    return v;
}

inline std::optional<double> parse_optional_double(std::string_view s, std::size_t line, const char* what) {
    if (s.empty() || s == "NA" || s == "nan" || s == "NaN") return std::nullopt;
    return parse_double(s, line, what);
}

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

inline std::string format_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string format_fixed(double v, int decimals) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    (void)ec;
    std::string s(buf, p);
    // "-0.0000" reads badly in tables.
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

// Cells holding a comma, quote or newline are quoted, quotes doubled.
inline void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        const auto& c = cells[i];
        if (c.find_first_of(",\"\n") == std::string::npos) {
            out << c;
            continue;
        }
        out << '"';
        for (char ch : c) {
            if (ch == '"') out << '"';
            out << ch;
        }
        out << '"';
    }
    out << '\n';
}

}  // namespace rtoi::csv
