#pragma once

#include <stdexcept>
#include <string>

namespace confsets {

/// Design matrix (or Gram matrix) is singular or numerically close to it.
class SingularDesignError : public std::runtime_error {
public:
  explicit SingularDesignError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver exhausted its sweep budget before meeting tolerance.
class NonConvergenceError : public std::runtime_error {
public:
  explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was asked to combine objects from incompatible tuning regimes.
class WrongRegimeError : public std::invalid_argument {
public:
  explicit WrongRegimeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Rejection sampling found no interior point (shape looks empty or degenerate).
class EmptyShapeError : public std::runtime_error {
public:
  explicit EmptyShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// A calibration loop ran out of iterations before its stopping rule fired.
class CalibrationBudgetError : public std::runtime_error {
public:
  explicit CalibrationBudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed CSV input; message carries the 1-based line number.
class CsvError : public std::runtime_error {
public:
  CsvError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace confsets
