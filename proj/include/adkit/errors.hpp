#pragma once

#include <stdexcept>
#include <string>

namespace adkit {

// Base class for all toolkit errors. The CLI maps ConfigError to exit code 2
// and every other Error to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed binary container (PGM header fields, checkpoint magic/layout).
struct FormatError : Error {
    using Error::Error;
};

// Text input that cannot be tokenized (manifest CSV, config file).
struct ParseError : Error {
    using Error::Error;
};

// Input that parses but violates a documented invariant.
struct ValidationError : Error {
    using Error::Error;
};

// Shape mismatch between data and model state.
struct DimensionError : Error {
    using Error::Error;
};

// Non-finite loss during training; message carries the epoch.
struct DivergenceError : Error {
    using Error::Error;
};

// Score set whose spread is too small to normalize against.
struct DegenerateRangeError : Error {
    using Error::Error;
};

// Requested split cannot be satisfied by the available patients.
struct InfeasibleError : Error {
    using Error::Error;
};

// Pipeline stage invoked before its prerequisite stage completed.
struct DependencyError : Error {
    using Error::Error;
};

// Invalid run configuration; detected before any work starts.
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem failure (unwritable path, short read).
struct IoError : Error {
    using Error::Error;
};

} // namespace adkit
