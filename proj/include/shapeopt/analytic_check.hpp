#pragma once

#include <string>
#include <vector>

namespace shapeopt {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Self-test of the closed-form disk solution of example 1 against
/// finite-difference and quadrature oracles.
std::vector<CheckResult> analytic_check();

}  // namespace shapeopt
