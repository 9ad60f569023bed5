#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace macromc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input value lies outside the domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A domain object violates one of its invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A value lies outside an admissible closed interval.
class BoundsError : public DomainError {
public:
    BoundsError(const std::string& what, double value, double lower, double upper);

    double value() const noexcept { return value_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

private:
    double value_;
    double lower_;
    double upper_;
};

/// A measured voltage implies a concentration outside the sensitivity model.
class OutOfCalibrationError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Two traces do not share a sample grid.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// A trace carries no usable signal.
class NoSignalError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace macromc
