#include "shapeopt/analytic_check.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "shapeopt/problems.hpp"
#include "shapeopt/shape_tensor.hpp"

namespace shapeopt {

namespace {

namespace an = problems::analytic;
constexpr double kPi = std::numbers::pi;

/// Deterministic sample points of the disk of radius r, kept away from the
/// unit circle where u has a kink in its second derivatives.
std::vector<Point> sample_points(double radius, int count) {
  std::vector<Point> out;
  for (int i = 0; out.size() < static_cast<std::size_t>(count); ++i) {
    const double s = std::fmod(0.6180339887498949 * (i + 1), 1.0);
    const double rho = radius * std::sqrt(std::fmod(0.7548776662466927 * (i + 1), 1.0)) * 0.95;
    if (std::abs(rho - 1.0) < 0.02) continue;
    out.emplace_back(rho * std::cos(2.0 * kPi * s), rho * std::sin(2.0 * kPi * s));
  }
  return out;
}

/// ∫_a^b g(r) dr by composite 5-point Gauss-Legendre.
template <typename F>
double gauss(F g, double a, double b, int panels) {
  static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                              0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                              0.2369268850561891, 0.2369268850561891};
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * h;
    for (int i = 0; i < 5; ++i) total += 0.5 * h * w[i] * g(mid + 0.5 * h * x[i]);
  }
  return total;
}

CheckResult make(std::string name, double value, double expected, double tol) {
  return {std::move(name), value, expected, tol, std::abs(value - expected) <= tol};
}

}  // namespace

std::vector<CheckResult> analytic_check() {
  std::vector<CheckResult> out;
  const double r_opt = std::numbers::sqrt2;

  out.push_back(make("J(sqrt2) = -pi/16", an::J(r_opt), -kPi / 16.0, 1e-14));
  for (double p : {1.1, 1.5, 2.0}) {
    out.push_back(make("eta(sqrt2, " + std::to_string(p).substr(0, 3) + ") = 0", an::eta(r_opt, p), 0.0, 1e-14));
  }
  out.push_back(make("eta(1, 2) = sqrt(2 pi)/16", an::eta(1.0, 2.0), std::sqrt(2.0 * kPi) / 16.0, 1e-14));

  // J(D_R) = ∫ u/2 in polar coordinates, split at the kink r = 1.
  for (double radius : {1.0, 1.2, r_opt, 1.7}) {
    const auto integrand = [&](double r) { return 2.0 * kPi * r * 0.5 * an::u(radius, Point(r, 0.0)); };
    double quad = gauss(integrand, 0.0, 1.0, 20);
    if (radius > 1.0) quad += gauss(integrand, 1.0, radius, 20);
    out.push_back(make("J(" + std::to_string(radius).substr(0, 5) + ") vs radial quadrature",
                       an::J(radius), quad, 1e-13));
  }

  // Gradients, Laplacians and div K against central differences.
  const double radius = 1.3;
  const double h = 1e-5;
  double grad_err = 0.0;
  double lap_err = 0.0;
  double k_err = 0.0;
  double div_err = 0.0;
  const ProblemSpec spec = problems::example1_spec();
  for (const Point& x : sample_points(radius, 20)) {
    Vec2 gu_fd;
    Vec2 gy_fd;
    double lap_u = 0.0;
    double lap_y = 0.0;
    Vec2 div_k = Vec2::Zero();
    for (int c = 0; c < 2; ++c) {
      const Vec2 e = h * Vec2::Unit(c);
      gu_fd(c) = (an::u(radius, x + e) - an::u(radius, x - e)) / (2.0 * h);
      gy_fd(c) = (an::y(radius, x + e) - an::y(radius, x - e)) / (2.0 * h);
      const double h2 = 1e-3;
      const Vec2 e2 = h2 * Vec2::Unit(c);
      lap_u += (an::u(radius, x + e2) - 2.0 * an::u(radius, x) + an::u(radius, x - e2)) / (h2 * h2);
      lap_y += (an::y(radius, x + e2) - 2.0 * an::y(radius, x) + an::y(radius, x - e2)) / (h2 * h2);
      div_k += (an::K(radius, x + e).col(c) - an::K(radius, x - e).col(c)) / (2.0 * h);
    }
    grad_err = std::max({grad_err, (gu_fd - an::grad_u(radius, x)).norm(),
                         (gy_fd - an::grad_y(radius, x)).norm()});
    lap_err = std::max({lap_err, std::abs(-lap_u - spec.f(x)),
                        std::abs(-lap_y + spec.j_prime(an::u(radius, x)))});
    k_err = std::max(k_err, (an::K(radius, x) -
                             shape_tensor_K(an::grad_u(radius, x), an::grad_y(radius, x))).norm());
    const Vec2 expected = spec.f(x) * an::grad_y(radius, x) -
                          spec.j_prime(an::u(radius, x)) * an::grad_u(radius, x);
    div_err = std::max(div_err, (div_k - expected).norm());
  }
  out.push_back(make("grad u, grad y vs central differences", grad_err, 0.0, 1e-6));
  out.push_back(make("-lap u = f, -lap y = -j'(u)", lap_err, 0.0, 1e-5));
  out.push_back(make("K vs shape tensor of the gradients", k_err, 0.0, 1e-14));
  out.push_back(make("div K = f grad y - j'(u) grad u", div_err, 0.0, 1e-6));

  // S = K - c I with c = (R² - 2)/16 is admissible (S n = j(u) n = 0 on
  // |x| = R), and η is the norm of the constant misfit c I.
  for (double rad : {1.0, 1.2, 1.7}) {
    const double c = (rad * rad - 2.0) / 16.0;
    double trace_err = 0.0;
    for (int k = 0; k < 16; ++k) {
      const double phi = 2.0 * kPi * k / 16.0;
      const Vec2 n(std::cos(phi), std::sin(phi));
      const Point x = rad * (1.0 - 1e-12) * n;
      trace_err = std::max(trace_err, ((an::K(rad, x) - c * Mat2::Identity()) * n).norm());
    }
    out.push_back(make("K - cI has zero normal trace, R=" + std::to_string(rad).substr(0, 3),
                       trace_err, 0.0, 1e-10));
    const double norm_ci = std::abs(c) * std::sqrt(2.0) * std::pow(kPi * rad * rad, 1.0 / 1.5);
    out.push_back(make("eta(" + std::to_string(rad).substr(0, 3) + ", 1.5) = ||cI||", an::eta(rad, 1.5),
                       norm_ci, 1e-14));
  }
  return out;
}

}  // namespace shapeopt
