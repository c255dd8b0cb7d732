#pragma once

#include <stdexcept>
#include <string>

namespace fixpoint {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected inputs, broken invariants, malformed configuration.
/// The CLI maps this family to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed values: wrong dimensions, non-finite coordinates, bad constants.
class InvalidInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Weight vectors violating the simplex or interval constraints.
class WeightError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Points outside a mapping's domain, or maps escaping their domain.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Inconsistent or unusable configuration (non-summable rules, unbounded
/// sampling regions, missing reference points, ...).
class ConfigurationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Out-of-range or coincident indices where distinct ones are required.
class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Ratio estimation impossible: every sampled pair hit the division guard.
class DivisionGuardError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Overflow or loss of finiteness in numeric evaluation. Never reported as a
/// silent Inf/NaN. The CLI maps this to exit code 3.
class NumericRangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace fixpoint
