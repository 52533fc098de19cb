#pragma once

#include <stdexcept>
#include <string>

namespace ssd {

// Error categories map one-to-one onto the CLI's nonzero exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable input data (exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or flag combinations (exit code 3).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown, e.g. a kernel that is not positive semidefinite
// (exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssd
