#pragma once

#include <stdexcept>
#include <string>

namespace eegdecode {

// Error categories map one-to-one onto CLI exit codes (2, 3, 4).

// Invalid parameters or configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that violates an operation's preconditions (shapes, labels, files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: rank deficiency, instability, non-convergence.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eegdecode
