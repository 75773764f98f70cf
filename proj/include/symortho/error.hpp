#pragma once

#include <stdexcept>
#include <string>

namespace symortho {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension or order mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Real/complex field mismatch, or a complex input handed to a real-only routine.
class FieldError : public Error {
public:
    using Error::Error;
};

/// The requested (notion, rank) combination admits no feasible point.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Shape or notion outside what a routine supports. Never silently approximated.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Malformed serialized input.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Bad argument that does not fit any of the categories above.
class ArgumentError : public Error {
public:
    using Error::Error;
};

} // namespace symortho
