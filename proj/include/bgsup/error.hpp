#pragma once

#include <stdexcept>
#include <string>

namespace bgsup {

/// Bad caller input: shapes, ranges, malformed files.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Floating-point breakdown or a factorization that failed to converge.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem failures (missing frame, unwritable output).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bgsup
