#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rainfall {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data that cannot be used (empty series, malformed rows, too few
/// observations for an estimator).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV row; carries the 1-based line number.
class MalformedRowError : public DataError {
 public:
  MalformedRowError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid run configuration or manifest.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root finder given an interval that does not bracket a sign change.
class NoBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method that ran out of iterations.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rainfall
