#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hierfcst {

//! Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

//! Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateError : public Error {
public:
    using Error::Error;
};

//! A value outside the mathematical domain of an operation (negative
//! quantity, log of a value below -1, Poisson on negative targets, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

//! Operation called on an object that is not in the required state.
class StateError : public Error {
public:
    using Error::Error;
};

class IllConditionedError : public Error {
public:
    using Error::Error;
};

//! Too few observed entries for matrix factorization.
class DensityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

//! A model family that exists in the benchmark list but is not implemented.
class OutOfScopeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace hierfcst
