#include <cmath>
#include <numbers>

#include "doctest.h"
#include "shapeopt/error.hpp"
#include "shapeopt/lms.hpp"
#include "shapeopt/poisson.hpp"
#include "shapeopt/problems.hpp"
#include "shapeopt/reconstruct.hpp"

using namespace shapeopt;

namespace {

/// Brute-force minimizer of the unregularized local objective: coordinate
/// pattern search with shrinking step, independent of the Newton solver.
Mat2 pattern_search(const QuadratureMatrices& target, double p, Mat2 start) {
  double step = 0.5;
  double best = local_fit_objective(target, start, p, 0.0);
  while (step > 1e-13) {
    bool improved = false;
    for (int i = 0; i < 4; ++i) {
      for (double sign : {1.0, -1.0}) {
        Mat2 trial = start;
        trial.data()[i] += sign * step;
        const double v = local_fit_objective(target, trial, p, 0.0);
        if (v < best) {
          best = v;
          start = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return start;
}

QuadratureMatrices constant_target(const Mat2& g) {
  QuadratureMatrices out;
  out.fill(g);
  return out;
}

}  // namespace

TEST_CASE("constant target is returned exactly") {
  Mat2 g;
  g << 0.4, -1.0, 2.5, 0.1;
  for (double p : {2.0, 1.5, 1.1}) {
    const GradientFit fit = local_gradient_fit(constant_target(g), p);
    CHECK((fit.gradient - g).norm() < 1e-14);
    CHECK_FALSE(fit.fallback);
  }
}

TEST_CASE("p = 2 returns the quadrature mean of a linear target") {
  // Linear target on a triangle: its mean is the value at the centroid.
  const Point a(0.0, 0.0);
  const Point b(1.0, 0.2);
  const Point c(0.3, 0.9);
  const auto xq = quadrature::points(a, b, c);
  const auto lin = [](const Point& x) {
    Mat2 m;
    m << x.x(), 2.0 * x.y(), -x.x() + x.y(), 1.0;
    return m;
  };
  QuadratureMatrices target;
  for (std::size_t q = 0; q < quadrature::kNumPoints; ++q) target[q] = lin(xq[q]);
  const GradientFit fit = local_gradient_fit(target, 2.0);
  CHECK((fit.gradient - lin((a + b + c) / 3.0)).norm() < 1e-14);
}

TEST_CASE("p = 1.1 with a two-valued target matches a brute-force minimizer") {
  Mat2 c1;
  Mat2 c2;
  c1 << 1.0, 0.0, 0.0, 0.0;
  c2 << 0.0, 0.5, -0.5, 2.0;
  // Points 0-2 carry weight 3·w1 ≈ 0.67, points 3-5 carry 3·w2 ≈ 0.33.
  QuadratureMatrices target;
  for (std::size_t q = 0; q < 3; ++q) target[q] = c1;
  for (std::size_t q = 3; q < 6; ++q) target[q] = c2;
  for (double p : {1.1, 1.5}) {
    const GradientFit fit = local_gradient_fit(target, p);
    REQUIRE_FALSE(fit.fallback);
    const Mat2 oracle = pattern_search(target, p, Mat2::Zero());
    CAPTURE(p);
    CHECK((fit.gradient - oracle).norm() < 1e-6);
    CHECK(local_fit_objective(target, fit.gradient, p, 0.0) <=
          local_fit_objective(target, oracle, p, 0.0) * (1 + 1e-10));
    // Between the two values: on the segment joining them.
    const Mat2 d = c2 - c1;
    const double s = (fit.gradient - c1).cwiseProduct(d).sum() / d.squaredNorm();
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    CHECK((fit.gradient - (c1 + s * d)).norm() < 1e-6);
  }
  // Large exponent pulls toward the midrange, away from the weighted mean.
  const GradientFit fit = local_gradient_fit(target, 1.1);
  const Mat2 mean = local_gradient_fit(target, 2.0).gradient;
  CHECK((fit.gradient - 0.5 * (c1 + c2)).norm() < (mean - 0.5 * (c1 + c2)).norm());
}

TEST_CASE("Newton never does worse than the mean") {
  const TriangleMesh m = refine_uniform(refine_uniform(build_regular_polygon(4, 2.0 * std::numbers::pi)));
  const ProblemSpec spec = problems::example1_spec();
  const StateAdjoint sa = solve_state_adjoint(m, spec);
  const auto K = assemble_K_field(m, sa.u, sa.y);
  const LmsSolution sol = solve_p(m, K, assemble_constraint_rhs(m, spec, sa.u, sa.y), 1.1);
  const double eps = regularization_floor(K, 1e-8);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const QuadratureMatrices target = misfit_target(m, sol.S, K, t, 1.1, eps);
    const GradientFit fit = local_gradient_fit(target, 1.1);
    const Mat2 mean = local_gradient_fit(target, 2.0).gradient;
    CHECK_FALSE(fit.fallback);
    CHECK(local_fit_objective(target, fit.gradient, 1.1, 0.0) <=
          local_fit_objective(target, mean, 1.1, 0.0) * (1 + 1e-12));
  }
}

TEST_CASE("value fit is anchored at the centroid") {
  const TriangleMesh m = build_regular_polygon(3, 1.0);
  Mat2 g;
  g << 1.0, 2.0, -3.0, 0.5;
  const Vec2 theta(0.2, -0.4);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const AffineMap map = local_value_fit(m, t, g, theta);
    const auto [a, b, c] = m.corners(t);
    const auto xq = quadrature::points(a, b, c);
    Vec2 mean = Vec2::Zero();
    for (std::size_t q = 0; q < quadrature::kNumPoints; ++q) mean += quadrature::kDegree4[q].weight * map(xq[q]);
    CHECK((mean - theta).norm() < 1e-15);
    const AffineMap flat = local_value_fit(m, t, Mat2::Zero(), theta);
    CHECK((flat(a) - theta).norm() == 0.0);
  }
}

TEST_CASE("vertex averaging") {
  const TriangleMesh m = refine_uniform(build_regular_polygon(6, 1.0));
  Mat2 g;
  g << 0.3, -1.0, 2.0, 0.7;
  const Vec2 shift(0.1, 0.2);
  std::vector<AffineMap> same(m.num_triangles(), AffineMap{g, Point::Zero(), shift});
  const VecP1Field rep = vertex_average(m, same);
  for (int v = 0; v < m.num_vertices(); ++v) CHECK((rep.values[v] - (g * m.vertex(v) + shift)).norm() < 1e-14);

  // Constant per triangle: vertex value is the plain mean over its patch.
  std::vector<AffineMap> consts(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) consts[t].value = Vec2(t, -2.0 * t);
  const VecP1Field avg = vertex_average(m, consts);
  for (int v = 0; v < m.num_vertices(); ++v) {
    Vec2 expected = Vec2::Zero();
    for (int t : m.vertex_triangles(v)) expected += Vec2(t, -2.0 * t);
    expected /= static_cast<double>(m.vertex_triangles(v).size());
    CHECK((avg.values[v] - expected).norm() < 1e-13);
  }
  CHECK_THROWS_AS(vertex_average(m, std::vector<AffineMap>(3)), ParameterError);
}

TEST_CASE("reconstruction on the square moves the boundary toward the disk") {
  // Square with the area of the optimal disk: side midpoints lie inside it,
  // corners outside.
  TriangleMesh m = build_regular_polygon(4, 2.0 * std::numbers::pi);
  for (int i = 0; i < 4; ++i) m = refine_uniform(m);
  const ProblemSpec spec = problems::example1_spec();
  const StateAdjoint sa = solve_state_adjoint(m, spec);
  const auto K = assemble_K_field(m, sa.u, sa.y);
  const LmsSolution sol = solve_p(m, K, assemble_constraint_rhs(m, spec, sa.u, sa.y), 1.1);
  const Reconstruction rec = reconstruct_deformation(m, sol, K, 1.1);
  CHECK(rec.fallback_count == 0);
  const double J0 = evaluate_J(m, spec, sa.u);
  // Initial vertices 1, 3, 5, 7 are corners; 2, 4, 6, 8 side midpoints.
  for (int k = 0; k < 4; ++k) {
    const int corner = 1 + 2 * k;
    const int mid = 2 + 2 * k;
    const double c = rec.theta.values[corner].dot(m.vertex(corner).normalized());
    const double s = rec.theta.values[mid].dot(m.vertex(mid).normalized());
    // Midpoints move out toward the disk much faster than the corners.
    CHECK(s > 0.0);
    CHECK(s > 5.0 * std::abs(c));
    // Each normal component agrees in sign with the finite-difference
    // descent direction of J for that single boundary vertex.
    for (int v : {corner, mid}) {
      std::vector<Point> x = m.vertices();
      const double h = 1e-6;
      x[v] += h * x[v].normalized();
      const TriangleMesh moved = m.with_vertices(x);
      const double dJ = (evaluate_J(moved, spec, solve_state(moved, spec)) - J0) / h;
      CAPTURE(v);
      CHECK(rec.theta.values[v].dot(m.vertex(v)) * dJ < 0.0);
    }
  }
  // Area-weighted mean zero.
  Vec2 mean = Vec2::Zero();
  for (int t = 0; t < m.num_triangles(); ++t) {
    const Triangle& tri = m.triangle(t);
    mean += m.signed_area(t) * (rec.theta.values[tri[0]] + rec.theta.values[tri[1]] + rec.theta.values[tri[2]]) / 3.0;
  }
  CHECK(mean.norm() < 1e-12);
}

TEST_CASE("zero solution reconstructs to zero and changes stay local") {
  const TriangleMesh m = refine_uniform(build_regular_polygon(5, 1.0));
  const std::vector<Mat2> K(m.num_triangles(), Mat2::Zero());
  LmsSolution sol;
  sol.S.rows = {Eigen::VectorXd::Zero(m.num_edges()), Eigen::VectorXd::Zero(m.num_edges())};
  sol.theta.values.assign(m.num_triangles(), Vec2::Zero());
  for (double p : {2.0, 1.1}) {
    for (const Vec2& v : reconstruct_deformation(m, sol, K, p).theta.values) CHECK(v.norm() == 0.0);
  }
  // Before the mean shift the field is local: perturb theta on one triangle.
  std::vector<AffineMap> maps(m.num_triangles());
  const VecP1Field base = vertex_average(m, maps);
  maps[3].value = Vec2(1.0, 1.0);
  const VecP1Field bumped = vertex_average(m, maps);
  const Triangle& tri = m.triangle(3);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const bool touched = v == tri[0] || v == tri[1] || v == tri[2];
    CHECK(((bumped.values[v] - base.values[v]).norm() > 0.0) == touched);
  }
}

TEST_CASE("reconstruction is translation equivariant") {
  const Vec2 shift(0.25, 0.5);
  ProblemSpec moved = problems::example1_spec();
  const auto f = moved.f;
  moved.f = [f, shift](const Point& x) { return f(x - shift); };
  TriangleMesh m = refine_uniform(refine_uniform(build_regular_polygon(8, 2.0)));
  const auto run = [](const TriangleMesh& mesh, const ProblemSpec& spec) {
    const StateAdjoint sa = solve_state_adjoint(mesh, spec);
    const auto K = assemble_K_field(mesh, sa.u, sa.y);
    const LmsSolution sol = solve_p(mesh, K, assemble_constraint_rhs(mesh, spec, sa.u, sa.y), 1.1);
    return reconstruct_deformation(mesh, sol, K, 1.1).theta;
  };
  const VecP1Field a = run(m, problems::example1_spec());
  const VecP1Field b = run(translate(m, shift), moved);
  double scale = 0.0;
  double diff = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    scale = std::max(scale, a.values[v].norm());
    diff = std::max(diff, (a.values[v] - b.values[v]).norm());
  }
  CHECK(diff <= 1e-8 * scale);
}
