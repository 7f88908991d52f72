#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gnbfit {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature ran out of budget before meeting its tolerance.
/// Carries the best value reached so callers can still inspect it.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double best_value, double abs_error_estimate,
                  std::size_t evaluations)
      : std::runtime_error(what),
        best_value_(best_value),
        abs_error_estimate_(abs_error_estimate),
        evaluations_(evaluations) {}

  double best_value() const noexcept { return best_value_; }
  double abs_error_estimate() const noexcept { return abs_error_estimate_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  double best_value_;
  double abs_error_estimate_;
  std::size_t evaluations_;
};

/// Data cannot support an estimate (empty, zero variance, zero IQR...).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; line is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gnbfit
