#pragma once

#include <stdexcept>
#include <string>

namespace mpmdp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text (JSON syntax, DIMACS syntax, rational literals).
/// Messages carry position information when the underlying parser provides it.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally well-formed input that violates a model/query invariant.
/// Messages name the violated invariant and the offending entity.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Internal solver failure (certificate mismatch, iteration guard).
/// Seeing one of these is a bug, not a property of the input.
class SolveError : public Error {
public:
    using Error::Error;
};

} // namespace mpmdp
