#pragma once

// Single-column text data: one decimal number per line, '.' as decimal
// separator, an optional non-numeric header on the first line.

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fdel/error.hpp"
#include "fdel/spectral.hpp"

namespace fdel {

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

[[nodiscard]] inline std::vector<double> read_column(std::istream& in) {
    std::vector<double> out;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        const std::string_view cell(line.data() + first, last - first + 1);
        if (cell.find_first_of(",;\t ") != std::string_view::npos)
            throw InvalidInput("line " + std::to_string(number) + ": expected a single column, got '" +
                               std::string(cell) + "'");
        double v = 0.0;
        if (!detail::parse_double(cell, v)) {
            if (number == 1) continue;
            throw InvalidInput("line " + std::to_string(number) + ": not a number: '" + std::string(cell) + "'");
        }
        if (!std::isfinite(v))
            throw InvalidInput("line " + std::to_string(number) + ": non-finite value '" + std::string(cell) + "'");
        out.push_back(v);
    }
    if (in.bad()) throw InvalidInput("read error");
    return out;
}

[[nodiscard]] inline TimeSeries read_series(std::istream& in) { return TimeSeries(read_column(in)); }

/// Shortest round-trip decimal form, one value per line.
inline void write_column(std::ostream& out, std::span<const double> values) {
    char buf[64];
    for (double v : values) {
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, ptr - buf);
        out.put('\n');
    }
}

}  // namespace fdel
