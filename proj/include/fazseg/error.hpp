#pragma once

#include <stdexcept>
#include <string>

namespace fazseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read, decoded, or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation was violated.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Two rasters that must share geometry do not.
class GeometryMismatch : public Error {
public:
    using Error::Error;
};

} // namespace fazseg
