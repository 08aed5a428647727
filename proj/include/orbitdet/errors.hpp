#pragma once

#include <stdexcept>
#include <string>

namespace orbitdet {

// Tensor/kernel shape mismatches.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural graph invalidity (duplicate ids, dangling refs, cycles).
// Distinct from constraint Violations, which are data, not errors.
struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File and wire-format problems (unreadable file, bad magic, malformed JSON).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameters: bad DpuConfig, bad stage spec, missing quant params,
// empty calibration set.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Domain-level failures that map to CLI exit code 1 (e.g. evaluating with no
// ground truth at all).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace orbitdet
