#pragma once

#include <stdexcept>
#include <string>

namespace ringlab {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (s <= 0, p < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical evaluation that failed to reach its tolerance.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Invalid grid, ring, or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Kernel evaluated on the diagonal.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver stopped before reaching the requested residual.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Non-finite or otherwise corrupted simulation state, or a rejected step.
class StateError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or its contents are malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ringlab
