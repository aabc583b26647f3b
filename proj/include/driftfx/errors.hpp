#pragma once

#include <stdexcept>
#include <string>

namespace driftfx {

// Error taxonomy maps onto process exit codes:
//   UsageError/ConfigError -> 1, DataError -> 2, NumericError -> 3.

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid parameter values (nonpositive decay, negative spread, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (CSV schema, date alignment, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (singular covariance, nonpositive dispersion, ...).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericError*>(&e)) return 3;
    if (dynamic_cast<const DataError*>(&e)) return 2;
    return 1;  // usage / config / anything else
}

}  // namespace driftfx
