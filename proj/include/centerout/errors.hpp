#pragma once

#include <stdexcept>
#include <string>

namespace centerout {

// invalid-argument conditions use std::invalid_argument directly.

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceFailure : std::runtime_error {
  ConvergenceFailure(const std::string& msg, double marginal_error_,
                     int iterations_)
      : std::runtime_error(msg),
        marginal_error(marginal_error_),
        iterations(iterations_) {}
  double marginal_error;
  int iterations;
};

struct OutOfDomain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedPlanKind : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, long line_) : std::runtime_error(msg), line(line_) {}
  long line;
};

}  // namespace centerout
