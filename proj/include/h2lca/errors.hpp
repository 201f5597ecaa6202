#pragma once

#include <stdexcept>
#include <string>

namespace h2lca {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text (model documents, config files, CSV rows).
/// Carries the 1-based line number of the offending line.
struct ParseError : Error {
    ParseError(std::size_t line_no, const std::string& msg)
        : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
    std::size_t line;
};

/// Structurally valid input that violates model semantics
/// (dangling references, duplicate ids, flows at non-buffer resources).
struct ModelError : Error {
    using Error::Error;
};

/// Semantic problems in time-series data (duplicates, gaps, empty joins).
struct IngestError : Error {
    using Error::Error;
};

/// Numerical failures: singular or ill-conditioned systems.
struct NumericalError : Error {
    using Error::Error;
};

} // namespace h2lca
