#pragma once

#include <stdexcept>
#include <string>

namespace metamix {

// Contract violation: bad shapes, bad arguments, malformed input files.
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// NaN/Inf produced by a computation, or a diverged training run.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration (reported with the offending key path).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace metamix
