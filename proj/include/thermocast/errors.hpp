#pragma once

#include <stdexcept>
#include <string>

namespace thermocast {

// Error taxonomy shared by every module. All types derive from
// std::runtime_error so callers can catch coarsely; the CLI maps them to
// stable exit codes.

// Shape or length mismatch between operands.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input outside the operation's domain (empty split, series too short, ...).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schema violation in data (non-binary ancillary feature, non-finite value).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file contents (bad CSV row, timestamp gap, corrupt checkpoint).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: non-scalar loss, missing gradient, mismatched report pair.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training diverged. Carries the last epoch that still had a finite loss.
struct TrainingError : std::runtime_error {
    int last_finite_epoch;
    TrainingError(const std::string& msg, int last_epoch)
        : std::runtime_error(msg), last_finite_epoch(last_epoch) {}
};

}  // namespace thermocast
