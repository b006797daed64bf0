#pragma once

#include <stdexcept>
#include <string>

namespace sphere_area {

/// Argument outside the documented domain of a function (e.g. t <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A value cannot be represented even in log-space.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Quadrature or an iterative solver did not reach the requested tolerance.
class ToleranceNotMet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulated event did not occur before the configured maximum time.
class HorizonExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The W* realization could not be made to cover the requested x range.
class CoverageFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query lies outside the range covered by a realization.
class OutOfCoverage : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A time-change level was not reached along a finite path.
class NotReached : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Rejection-sampler envelope fell below the target density (programming error).
class EnvelopeViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Sample too small for the requested statistic.
class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace sphere_area
