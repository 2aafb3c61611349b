#pragma once

#include <stdexcept>
#include <string>

namespace vrstream {

// I/O failures: missing files, unwritable outputs.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input data; carries a human-readable location where possible.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration, detected at construction time.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A requested computation exceeds a guard limit (e.g. enumeration size).
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset-level problems: missing traces, empty metric sets.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer dimension mismatches.
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace vrstream
