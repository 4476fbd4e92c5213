#pragma once

#include <stdexcept>
#include <string>

namespace btp {

/// Argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// A coefficient or integrand produced a non-finite value.
class NumericalDomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature stopped before meeting its tolerance.
class AccuracyError : public std::runtime_error {
public:
  AccuracyError(const std::string& what, double achieved, double requested)
      : std::runtime_error(what), achieved_(achieved), requested_(requested) {}

  double achieved() const noexcept { return achieved_; }
  double requested() const noexcept { return requested_; }

private:
  double achieved_;
  double requested_;
};

/// An outer path does not reach far enough in time for the requested composition.
class CoverageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A simulation ran out of its step budget before the stopping event.
class BudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegenerateStatistics : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace btp
