#pragma once

#include <stdexcept>
#include <string>

namespace ridge {

// Base class for every recoverable error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A kernel-weighted neighborhood carries no usable mass (the zeroth local
// moment fell below the floor), typically because the query point is far
// from all data relative to the bandwidth.
class empty_neighborhood_error : public error {
public:
    using error::error;
};

// The sample at hand is too degenerate for the requested operation
// (fewer than two distinct points, zero variance, all-constant data, ...).
class degenerate_sample_error : public error {
public:
    using error::error;
};

// Malformed user input: CSV parse failures, inconsistent dimensions,
// contradictory options.
class input_error : public error {
public:
    using error::error;
};

} // namespace ridge
