#pragma once

#include <stdexcept>
#include <string>

namespace gvn {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed flow-graph source. Carries the 1-based source position.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line, int column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// An internal invariant was violated. Indicates a bug in the caller or the
/// library, never bad user input.
class InternalError : public Error {
public:
    using Error::Error;
};

/// An oracle exploration budget (path count, expansion width) was exceeded.
/// The oracle refuses to sample or truncate, so this is a hard stop.
class BudgetError : public Error {
public:
    using Error::Error;
};

}  // namespace gvn
