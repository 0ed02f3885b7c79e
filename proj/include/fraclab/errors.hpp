#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

/// Base class of every exception thrown by the library. The CLI maps
/// ConfigError to exit status 2 and everything else to 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value type's invariant does not hold (non-unit point, negative weight...).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter lies outside the domain where a formula is defined.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// Objects built for different (n, L, symmetry) were combined.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

/// Zero fields, collapsed denominators.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// K is not positive on the grid, or is incompatible with the grid symmetry.
class InvalidKError : public Error {
 public:
  using Error::Error;
};

/// A located critical point of K is degenerate (assumption (nd) fails).
class NondegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Existence hypotheses (n >= 3, 0 < sigma < (n-2)/2) do not hold.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class IncompleteInventoryError : public Error {
 public:
  using Error::Error;
};

/// Missing or malformed input data (e.g. K derivative tables of wrong size).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed in a way that is not a reportable outcome.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fraclab
