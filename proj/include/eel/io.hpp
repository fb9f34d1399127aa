#pragma once

#include "eel/model.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace eel {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    if (field.empty()) throw ParseError(line, "empty field");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(line, "not a number: '" + std::string(field) + "'");
    }
    if (!std::isfinite(v)) throw ParseError(line, "non-finite value");
    return v;
}

}  // namespace detail

/// Comma-separated numeric rows, one observation per line. Lines starting
/// with '#' and blank lines are skipped. Every row must have the same width.
inline Sample read_sample(std::istream& in) {
    std::vector<double> values;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = view.find(',', start);
            values.push_back(detail::parse_double(view.substr(start, comma - start), line_no));
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) {
            width = count;
        } else if (count != width) {
            throw ParseError(line_no, "expected " + std::to_string(width) + " fields, found " +
                                          std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0) throw ParseError(line_no, "no observations");
    Eigen::Map<const Matrix> cols(values.data(), static_cast<Eigen::Index>(width),
                                  static_cast<Eigen::Index>(rows));
    return Sample::from_columns(Matrix(cols));
}

inline Sample read_sample(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io_error", "cannot open '" + path + "'");
    return read_sample(in);
}

}  // namespace eel
