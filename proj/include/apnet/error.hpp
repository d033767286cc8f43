#pragma once

#include <stdexcept>
#include <string>

namespace apnet {

// Bad input data: malformed files, inconsistent datasets, incompatible
// checkpoints. Contract violations (shape mismatches, empty inputs) use
// std::invalid_argument instead.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A representation degenerated to zero norm, so cosine scoring is undefined.
struct ScoringError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace apnet
