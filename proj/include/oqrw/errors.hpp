#pragma once

#include <stdexcept>
#include <string>

namespace oqrw {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A walk definition is malformed (unknown site, bad Kraus shape, duplicate edge).
class StructureError : public Error {
public:
    using Error::Error;
};

/// Numerical kernel failed to meet its contract (non-convergence, residual too large).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation's precondition (e.g. period of a reducible walk).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An internal consistency check on a computed object failed.
class DiagnosticError : public Error {
public:
    using Error::Error;
};

/// Configuration text could not be turned into a walk.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace oqrw
