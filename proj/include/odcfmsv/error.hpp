#pragma once

#include <stdexcept>
#include <string>

namespace odcf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad dimensions, malformed arguments, or values outside a parameter's support.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed input data (CSV, config, checkpoint).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (non-finite value, degenerate matrix).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization hit a non-positive pivot.
class DecompositionError : public NumericalError {
 public:
  DecompositionError(long pivot, double value)
      : NumericalError("Cholesky decomposition failed: pivot " + std::to_string(pivot) +
                       " is non-positive (" + std::to_string(value) + ")"),
        pivot_(pivot) {}
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

/// An eigenvalue fell below the configured floor.
class NearSingularError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace odcf
