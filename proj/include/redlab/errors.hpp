#pragma once

#include <stdexcept>
#include <string>

namespace redlab {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad thresholds, missing columns, contradictory
/// options. The CLI maps this to exit code 1.
struct ConfigError : Error {
    using Error::Error;
};

/// Malformed input data (CSV rows, XML, vector tables). Messages carry a
/// line number or byte offset where known. The CLI maps this to exit code 2.
struct ParseError : Error {
    using Error::Error;
};

/// A name lookup failed (unknown activity, unknown graph node).
struct LookupError : Error {
    using Error::Error;
};

} // namespace redlab
