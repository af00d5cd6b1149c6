#pragma once

#include <stdexcept>
#include <string>

namespace adagae {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-supplied data: non-finite entries, malformed files, mismatched sizes.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

// Bad parameters or configuration: out-of-range k, shape mismatches, invalid options.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numeric failure at runtime: divergence, overflow, degenerate graphs.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace adagae
