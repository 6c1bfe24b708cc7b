#pragma once

#include <stdexcept>
#include <string>

namespace homolab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs violate a documented precondition (bad range, inconsistent sizes, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A metric or solve that is mathematically undefined for the given input.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

} // namespace detail
} // namespace homolab
