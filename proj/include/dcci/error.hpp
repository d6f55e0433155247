#pragma once

#include <stdexcept>
#include <string>

namespace dcci {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Raised for invalid user configuration: incompatible estimand/dictionary
// pairs, folds too small for the requested rank, malformed specs.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class WeakInstrumentError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptyWindowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dcci
