#pragma once

#include <stdexcept>

namespace gcperim {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested closed form / exact profile does not exist for this shape or
// dimension; callers fall back to a numeric path.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by fits when fewer than two points survive the noise-exclusion rule.
struct InsufficientSignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gcperim
