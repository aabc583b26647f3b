#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "driftfx/errors.hpp"

namespace driftfx {

// Shortest decimal form that parses back to the identical double. Used for
// every number we persist, so CSV/JSON round trips are bit-exact.
inline std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// Strict full-field parse; the whole field must be one finite number.
inline double parse_double(std::string_view field, const std::string& where) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw DataError("unparseable number '" + std::string(field) + "' at " + where);
    if (!std::isfinite(value))
        throw DataError("non-finite number '" + std::string(field) + "' at " + where);
    return value;
}

// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Quantile with linear interpolation between order statistics (the
// describe-style convention): position p*(n-1) split into floor/frac.
inline double quantile_linear(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

inline double sign(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;  // sign(0) = 0 everywhere in this codebase
}

}  // namespace driftfx
