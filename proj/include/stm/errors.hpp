#pragma once

#include <stdexcept>
#include <string>

namespace stm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too few distinct inputs for the requested operation.
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// The spline system could not be solved to the exactness tolerance.
class ConditioningError : public Error {
public:
    ConditioningError(const std::string& what, std::size_t size, double residual, double ridge)
        : Error(what), system_size(size), max_residual(residual), ridge_used(ridge) {}

    std::size_t system_size;
    double max_residual;
    double ridge_used;
};

/// L_min >= L_max, or a level set whose levels leave its range.
class InvalidRangeError : public Error {
public:
    using Error::Error;
};

/// A histogram requested over a zero-width value range.
class DegeneratePdfError : public Error {
public:
    using Error::Error;
};

/// A moving average asked for more taps than there are observation sets.
class InsufficientHistoryError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition (e.g. non-positive errors in the Δ update).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or serialized input; message carries source and line.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace stm
