#pragma once

#include <stdexcept>
#include <string>

namespace reachtime {

/// Malformed arguments: bad dimensions, non-finite entries, violated preconditions.
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Exactly singular matrix where an inverse or solve was requested.
struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iterative kernel failed to converge within its iteration cap.
struct NumericalFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Simulated state escaped the divergence guard (mis-certified gain or bad config).
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, double when)
      : std::runtime_error(what), time(when) {}
  double time;
};

}  // namespace reachtime
