#pragma once

#include <stdexcept>
#include <string>

namespace robarb {

// Malformed or missing input: files, CSV contents, configuration values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checkpoint or artifact does not fit the configuration it is used with.
class CompatibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values, degenerate samples, and other failures of the numerics.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A terminal value fell outside the price box Omega. Usually means the
// Wasserstein radius exceeds the bound padding delta.
class OutOfBoundsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace robarb
