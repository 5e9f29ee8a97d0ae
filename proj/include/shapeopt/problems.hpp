#pragma once

#include <string>
#include <vector>

#include "shapeopt/mesh.hpp"
#include "shapeopt/poisson.hpp"

namespace shapeopt::problems {

/// f = 1/2 - 1_D with D the unit disk; optimal shape is the disk of radius √2.
ProblemSpec example1_spec();
/// Five-fold symmetric Gaussian bumps ("gingerbread man").
ProblemSpec example2_spec();
/// Off-center quartic source ("kidney"); optimal barycenter not at the origin.
ProblemSpec example3_spec();

/// Registry lookup: "example1" (alias "polygon"), "gingerbread" (alias
/// "example2"), "kidney" (alias "example3"). Throws ParameterError otherwise.
ProblemSpec by_name(const std::string& name);
std::vector<std::string> registered_names();

/// Closed-form solution of example 1 on the disk D_R centered at the origin,
/// valid for R >= 1. Points with |x| = 1 take the outer branch.
namespace analytic {

double u(double radius, const Point& x);
double y(double radius, const Point& x);
Vec2 grad_u(double radius, const Point& x);
Vec2 grad_y(double radius, const Point& x);
Mat2 K(double radius, const Point& x);
/// J(D_R) = π/32 (R⁴ - 4R² + 2).
double J(double radius);
/// η_p(D_R) = |2 - R²|/16 · √2 · (πR²)^{1/p}.
double eta(double radius, double p);

}  // namespace analytic

}  // namespace shapeopt::problems
