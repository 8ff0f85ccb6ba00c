#pragma once

#include <stdexcept>
#include <string>

namespace cocopnp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands have incompatible dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An experiment or solver configuration is inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or has the wrong format.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed (non-convergence, divergence, NaN).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cocopnp
