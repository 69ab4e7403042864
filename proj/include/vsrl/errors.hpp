#ifndef VSRL_ERRORS_HPP_
#define VSRL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace vsrl {

// Invalid configuration, unknown key, or violated parameter constraint.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, diverged training, or malformed numerical input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File-system or serialization failures (missing files, bad checkpoints).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatches between vectors, matrices and network specs.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace vsrl

#endif  // VSRL_ERRORS_HPP_
