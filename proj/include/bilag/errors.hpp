#pragma once

#include <stdexcept>
#include <string>

namespace bilag {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed source text (expressions or scene files).
struct ParseError : Error {
    ParseError(std::string msg, int line, int col)
        : Error(std::move(msg)), line(line), col(col) {}
    int line = 0;
    int col  = 0;
};

// Expression references a name the owning chart does not declare,
// or a scene cross-reference does not resolve.
struct BindError : Error {
    using Error::Error;
};

// Numeric domain failure: log of a non-positive value, division by zero,
// fractional power of a non-positive base, singular pivot, and friends.
struct DomainError : Error {
    using Error::Error;
};

// A verification precondition failed hard (wrong rank, chart mismatch,
// inverse-consistency failure, degenerate sample point).
struct CheckError : Error {
    using Error::Error;
};

} // namespace bilag
