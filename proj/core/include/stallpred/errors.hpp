#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stallpred {

// Input file is missing a required column.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// A cell could not be converted to the expected type.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally broken input (truncated file, non-uniform time base, ...).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed input whose values violate a domain constraint.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Not enough samples of a class to satisfy a split request.
struct CapacityError : std::runtime_error {
    CapacityError(const std::string& what, std::size_t shortfall_)
        : std::runtime_error(what), shortfall(shortfall_) {}
    std::size_t shortfall = 0;
};

// Non-finite values or irrecoverably ill-conditioned linear algebra.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct CorruptFileError : std::runtime_error {
    explicit CorruptFileError(const std::string& what) : std::runtime_error(what) {}
};

struct VersionError : std::runtime_error {
    explicit VersionError(const std::string& what) : std::runtime_error(what) {}
};

// Metric has no defined value for the given inputs (e.g. AUC with one class).
struct UndefinedMetricError : std::runtime_error {
    explicit UndefinedMetricError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or inconsistent experiment configuration; `key` names the offender.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& key_, const std::string& what)
        : std::runtime_error(what), key(key_) {}
    std::string key;
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stallpred
