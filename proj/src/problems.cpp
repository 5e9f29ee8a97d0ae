#include "shapeopt/problems.hpp"

#include <cmath>
#include <numbers>

#include "shapeopt/error.hpp"

namespace shapeopt::problems {

namespace {

constexpr double kPi = std::numbers::pi;

void with_objective(ProblemSpec& spec) {
  spec.j = [](double u) { return 0.5 * u; };
  spec.j_prime = [](double) { return 0.5; };
}

void check_radius(double radius) {
  if (!(radius >= 1.0) || !std::isfinite(radius)) {
    throw DomainError("closed form requires a disk radius R >= 1");
  }
}

void check_point(double radius, const Point& x) {
  check_radius(radius);
  if (!(x.norm() < radius)) throw DomainError("closed form evaluated outside the open disk");
}

}  // namespace

ProblemSpec example1_spec() {
  ProblemSpec spec;
  spec.name = "example1";
  spec.f = [](const Point& x) { return x.squaredNorm() < 1.0 ? -0.5 : 0.5; };
  with_objective(spec);
  return spec;
}

ProblemSpec example2_spec() {
  std::vector<Point> bumps;
  std::vector<Point> dips;
  for (int i = 1; i <= 5; ++i) {
    const double a = (2.0 * i + 1.0) * kPi / 5.0;
    bumps.emplace_back(std::sin(a), std::cos(a));
    const double b = 2.0 * i * kPi / 5.0;
    dips.emplace_back(1.2 * std::sin(b), 1.2 * std::cos(b));
  }
  ProblemSpec spec;
  spec.name = "gingerbread";
  spec.f = [bumps, dips](const Point& x) {
    double value = -0.5 + 0.8 * x.squaredNorm();
    for (const Point& c : bumps) value += 2.0 * std::exp(-8.0 * (x - c).squaredNorm());
    for (const Point& c : dips) value -= std::exp(-8.0 * (x - c).squaredNorm());
    return value;
  };
  with_objective(spec);
  return spec;
}

ProblemSpec example3_spec() {
  ProblemSpec spec;
  spec.name = "kidney";
  spec.f = [](const Point& x) {
    const double s = x.x() + 0.4 - x.y() * x.y();
    return 2.5 * s * s + x.squaredNorm() - 1.0;
  };
  with_objective(spec);
  return spec;
}

ProblemSpec by_name(const std::string& name) {
  if (name == "example1" || name == "polygon") return example1_spec();
  if (name == "gingerbread" || name == "example2") return example2_spec();
  if (name == "kidney" || name == "example3") return example3_spec();
  throw ParameterError("unknown problem '" + name + "'");
}

std::vector<std::string> registered_names() { return {"example1", "gingerbread", "kidney", "polygon"}; }

namespace analytic {

double u(double radius, const Point& x) {
  check_point(radius, x);
  const double r2 = x.squaredNorm();
  const double big = radius * radius;
  if (r2 < 1.0) return (big + r2) / 8.0 - 0.25 - 0.5 * std::log(radius);
  return (big - r2) / 8.0 + 0.5 * (0.5 * std::log(r2) - std::log(radius));
}

double y(double radius, const Point& x) {
  check_point(radius, x);
  return (x.squaredNorm() - radius * radius) / 8.0;
}

Vec2 grad_u(double radius, const Point& x) {
  check_point(radius, x);
  const double r2 = x.squaredNorm();
  if (r2 < 1.0) return 0.25 * x;
  return -0.25 * x + 0.5 * x / r2;
}

Vec2 grad_y(double radius, const Point& x) {
  check_point(radius, x);
  return 0.25 * x;
}

Mat2 K(double radius, const Point& x) {
  check_point(radius, x);
  const double r2 = x.squaredNorm();
  const Mat2 xx = x * x.transpose();
  if (r2 < 1.0) return r2 / 16.0 * Mat2::Identity() - xx / 8.0;
  return (0.125 - r2 / 16.0) * Mat2::Identity() - (0.25 / r2 - 0.125) * xx;
}

double J(double radius) {
  check_radius(radius);
  const double r2 = radius * radius;
  return kPi / 32.0 * (r2 * r2 - 4.0 * r2 + 2.0);
}

double eta(double radius, double p) {
  check_radius(radius);
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("eta requires 1 < p < inf");
  const double r2 = radius * radius;
  return std::abs(2.0 - r2) / 16.0 * std::numbers::sqrt2 * std::pow(kPi * r2, 1.0 / p);
}

}  // namespace analytic

}  // namespace shapeopt::problems
