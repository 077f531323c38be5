#pragma once

#include <stdexcept>
#include <string>

namespace rdpforge {

// Base class for all library errors so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller violated a precondition (bad range, bad parameter, mismatched inputs).
struct UsageError : Error {
    using Error::Error;
};

// Malformed input file; message carries the 1-based line number.
struct ParseError : Error {
    ParseError(size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}
    size_t line_number;
};

// Sketches with different dimensions or hash seeds.
struct IncompatibleError : Error {
    using Error::Error;
};

// Estimate or distance requested from an empty store.
struct UndefinedError : Error {
    using Error::Error;
};

// A configured hard cap was exceeded (family size, enumeration cap).
struct LimitError : Error {
    using Error::Error;
};

// Operation not available for this environment.
struct UnsupportedError : Error {
    using Error::Error;
};

// Inconsistent run configuration (e.g. language tester with sketched stores).
struct ConfigError : Error {
    using Error::Error;
};

// Learn phase ran past its wall-clock budget.
struct BudgetError : Error {
    using Error::Error;
};

}  // namespace rdpforge
