#pragma once

#include <stdexcept>
#include <string>

namespace oamgrav {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed parameters outside an operation's domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not deliver a result at the required accuracy
/// (singular generating-function denominator, failed self-test, iteration cap).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Simulation parameters fall outside the physical regime the model assumes.
class RegimeError : public Error {
public:
    using Error::Error;
};

}  // namespace oamgrav
