#pragma once

#include <stdexcept>
#include <string>

namespace evcast {

/// Raised when input data, configuration, or call arguments violate a
/// documented precondition. Maps to process exit code 1 in the CLI.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a computation produces non-finite values or an iterative
/// routine fails to converge. Maps to process exit code 2 in the CLI.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace evcast
