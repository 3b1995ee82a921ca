#pragma once

#include <stdexcept>
#include <string>

namespace bidisc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (degenerate arc, point outside the bidisc, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A boundary evaluation was requested for a symbol whose coefficient tail is not summable.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// A Hankel window does not contain every frequency reachable from the truncation box.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Malformed symbol, matrix, or configuration input.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace bidisc
