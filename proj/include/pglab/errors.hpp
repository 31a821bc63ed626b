#pragma once

#include <stdexcept>
#include <string>

namespace pglab {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of an operation
// (negative probabilities, zero support where a log is taken, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Ill-conditioned or numerically failed linear algebra.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double condition_estimate = 0.0)
      : Error(what), condition_estimate(condition_estimate) {}
  double condition_estimate;
};

// Closed-loop or iteration matrix is not stable; carries the offending radius.
class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double spectral_radius)
      : Error(what), spectral_radius(spectral_radius) {}
  double spectral_radius;
};

// Invalid algorithm configuration (learning rates, regularization, schedules).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An iterative solver ran out of budget; carries the last gap seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double final_gap)
      : Error(what), final_gap(final_gap) {}
  double final_gap;
};

// Markov chain did not mix under power iteration.
class ReducibilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace pglab
