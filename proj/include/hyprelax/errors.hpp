#pragma once

#include <stdexcept>
#include <string>

namespace hyprelax {

/// Bad or inconsistent user-facing configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A computation failed numerically: NaN, non-convergence, CFL abort
/// (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hyprelax
