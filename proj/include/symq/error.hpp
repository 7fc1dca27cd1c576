#pragma once

#include <stdexcept>
#include <string>

namespace symq {

// Argument outside a function's mathematical domain (e.g. digamma(x <= 0)).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Vector/matrix dimensions inconsistent with the operation.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration value; message names the offending field.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite or otherwise unusable input data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called on an object in the wrong state (e.g. empty buffer).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sample too small or degenerate for the requested statistic.
struct DegenerateSampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace symq
