#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "doctest.h"
#include "shapeopt/error.hpp"
#include "shapeopt/lms.hpp"
#include "shapeopt/problems.hpp"
#include "shapeopt/reconstruct.hpp"

using namespace shapeopt;

namespace {

struct Setup {
  TriangleMesh mesh;
  ProblemSpec spec;
  StateAdjoint sa;
  std::vector<Mat2> K;
  ConstraintRhs rhs;
};

Setup make_setup(TriangleMesh mesh, ProblemSpec spec) {
  StateAdjoint sa = solve_state_adjoint(mesh, spec);
  auto K = assemble_K_field(mesh, sa.u, sa.y);
  auto rhs = assemble_constraint_rhs(mesh, spec, sa.u, sa.y);
  return {std::move(mesh), std::move(spec), std::move(sa), std::move(K), std::move(rhs)};
}

TriangleMesh square_mesh(int level) {
  TriangleMesh m = build_regular_polygon(4, 2.0 * std::numbers::pi);
  for (int i = 0; i < level; ++i) m = refine_uniform(m);
  return m;
}

double max_abs_diff(const LmsSolution& a, const LmsSolution& b) {
  double d = 0.0;
  for (int r = 0; r < 2; ++r) d = std::max(d, (a.S.rows[r] - b.S.rows[r]).cwiseAbs().maxCoeff());
  for (std::size_t t = 0; t < a.theta.values.size(); ++t)
    d = std::max(d, (a.theta.values[t] - b.theta.values[t]).cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < a.theta_b.values.size(); ++k)
    d = std::max(d, (a.theta_b.values[k] - b.theta_b.values[k]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
  const TriangleMesh m = square_mesh(2);
  const std::vector<Mat2> K(m.num_triangles(), Mat2::Zero());
  ConstraintRhs rhs{std::vector<Vec2>(m.num_triangles(), Vec2::Zero()),
                    std::vector<Vec2>(m.num_boundary_edges(), Vec2::Zero())};
  for (double p : {2.0, 1.1}) {
    const LmsSolution s = solve_p(m, K, rhs, p);
    CHECK(s.eta == 0.0);
    CHECK(s.S.rows[0].norm() == 0.0);
    CHECK(s.S.rows[1].norm() == 0.0);
    for (const Vec2& th : s.theta.values) CHECK(th.norm() == 0.0);
  }
}

TEST_CASE("constant K with homogeneous constraints: S = 0 is admissible so η <= ||K||") {
  const TriangleMesh m = square_mesh(2);
  const Mat2 c = 0.3 * Mat2::Identity();
  const std::vector<Mat2> K(m.num_triangles(), c);
  ConstraintRhs rhs{std::vector<Vec2>(m.num_triangles(), Vec2::Zero()),
                    std::vector<Vec2>(m.num_boundary_edges(), Vec2::Zero())};
  const LmsSolution s = solve_p2(m, K, rhs);
  CHECK(s.eta <= c.norm() * std::sqrt(area(m)) * (1 + 1e-12));
  // A constant is not in the divergence-free zero-flux RT0 space except 0.
  CHECK(s.S.rows[0].norm() < 1e-12);
  CHECK(s.eta == doctest::Approx(c.norm() * std::sqrt(area(m))).epsilon(1e-12));
}

TEST_CASE("eta of a constant misfit") {
  const TriangleMesh m = refine_uniform(build_disk_approximation(1.3, 1));
  const double c = -0.07;
  const std::vector<Mat2> K(m.num_triangles(), c * Mat2::Identity());
  RT0MatrixField zero{{Eigen::VectorXd::Zero(m.num_edges()), Eigen::VectorXd::Zero(m.num_edges())}};
  for (double p : {1.1, 1.5, 2.0}) {
    CHECK(eta_lp(m, zero, K, p) ==
          doctest::Approx(std::abs(c) * std::sqrt(2.0) * std::pow(area(m), 1.0 / p)).epsilon(1e-13));
  }
}

TEST_CASE("hybrid elimination agrees with the full saddle point solve") {
  for (const char* name : {"example1", "kidney"}) {
    const Setup s = make_setup(refine_uniform(build_disk_approximation(1.0, 1)), problems::by_name(name));
    for (double p : {2.0, 1.1}) {
      LmsControls hybrid;
      LmsControls direct;
      direct.backend = LmsBackend::Direct;
      const LmsSolution a = solve_p(s.mesh, s.K, s.rhs, p, hybrid);
      const LmsSolution b = solve_p(s.mesh, s.K, s.rhs, p, direct);
      CAPTURE(name);
      CAPTURE(p);
      CHECK(max_abs_diff(a, b) < 1e-10);
      CHECK(a.eta == doctest::Approx(b.eta).epsilon(1e-10));
      CHECK((a.compatibility_multiplier - b.compatibility_multiplier).norm() < 1e-12);
      CHECK(a.iterations == b.iterations);
      CHECK(a.kkt_residual <= 1e-10);
      CHECK(b.kkt_residual <= 1e-10);
    }
  }
}

TEST_CASE("constraints hold and theta has zero mean") {
  const Setup s = make_setup(build_disk_approximation(1.0, 3), problems::example3_spec());
  for (double p : {2.0, 1.1}) {
    const LmsSolution sol = solve_p(s.mesh, s.K, s.rhs, p);
    CHECK(sol.divergence_residual <= 1e-9);
    CHECK(sol.boundary_residual <= 1e-9);
    Vec2 mean = Vec2::Zero();
    for (int t = 0; t < s.mesh.num_triangles(); ++t) mean += s.mesh.signed_area(t) * sol.theta.values[t];
    CHECK(mean.norm() < 1e-13);
    // Off-center source on a centered disk violates compatibility.
    CHECK(sol.compatibility_multiplier.norm() > 1e-3);
  }
  // Divergence holds exactly up to the multiplier: ∫ div S = G - |τ| λ.
  const LmsSolution sol = solve_p2(s.mesh, s.K, s.rhs);
  const RT0Operators ops = assemble_rt0_operators(s.mesh, s.K, unit_weights(s.mesh));
  for (int r = 0; r < 2; ++r) {
    const Eigen::VectorXd div = ops.divergence * sol.S.rows[r];
    double worst = 0.0;
    for (int t = 0; t < s.mesh.num_triangles(); ++t) {
      worst = std::max(worst, std::abs(div(t) - s.rhs.volume[t](r) +
                                       s.mesh.signed_area(t) * sol.compatibility_multiplier(r)));
    }
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("misfit is orthogonal to divergence-free fields with zero normal trace") {
  const Setup s = make_setup(square_mesh(2), problems::example1_spec());
  REQUIRE(s.mesh.num_triangles() <= 200);
  for (double p : {2.0, 1.1}) {
    const LmsSolution sol = solve_p(s.mesh, s.K, s.rhs, p);
    const RT0Operators ops = assemble_rt0_operators(s.mesh, s.K, sol.weights);
    Eigen::MatrixXd constraints(ops.divergence.rows() + ops.trace.rows(), ops.divergence.cols());
    constraints << Eigen::MatrixXd(ops.divergence), Eigen::MatrixXd(ops.trace);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(constraints);
    const Eigen::MatrixXd z = lu.kernel();
    REQUIRE(z.cols() > 0);
    for (int r = 0; r < 2; ++r) {
      const Eigen::VectorXd misfit = Eigen::MatrixXd(ops.mass) * sol.S.rows[r] - ops.load[r];
      CAPTURE(p);
      CHECK((z.transpose() * misfit).cwiseAbs().maxCoeff() < 1e-12 * ops.load[r].norm());
    }
  }
}

TEST_CASE("saddle point system without the mean-zero rows is singular") {
  const Setup s = make_setup(square_mesh(1), problems::example1_spec());
  const RT0Operators ops = assemble_rt0_operators(s.mesh, s.K, unit_weights(s.mesh));
  const int ne = s.mesh.num_edges();
  const int nt = s.mesh.num_triangles();
  const int nb = s.mesh.num_boundary_edges();
  std::vector<Eigen::Triplet<double>> t;
  const auto add = [&](const linsolve::SparseMatrix& m, int r0, int c0, bool mirror) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (linsolve::SparseMatrix::InnerIterator it(m, k); it; ++it) {
        t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        if (mirror) t.emplace_back(c0 + it.col(), r0 + it.row(), it.value());
      }
  };
  add(ops.mass, 0, 0, false);
  add(ops.divergence, ne, 0, true);
  add(ops.trace, ne + nt, 0, true);
  linsolve::SparseMatrix kkt(ne + nt + nb, ne + nt + nb);
  kkt.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(kkt.rows());
  b.head(ne) = ops.load[0];
  CHECK_THROWS_AS(linsolve::solve_saddle({kkt, true}, b), SolverError);
}

TEST_CASE("p = 2 through the fixed point equals the linear solve") {
  const Setup s = make_setup(square_mesh(2), problems::example1_spec());
  const LmsSolution a = solve_p2(s.mesh, s.K, s.rhs);
  const LmsSolution b = solve_p(s.mesh, s.K, s.rhs, 2.0);
  CHECK(max_abs_diff(a, b) == 0.0);
  CHECK(b.iterations == 1);
  CHECK(b.converged);
}

TEST_CASE("reweighting lowers the Lp misfit below that of the p = 2 solution") {
  const Setup s = make_setup(square_mesh(3), problems::example1_spec());
  const LmsSolution two = solve_p2(s.mesh, s.K, s.rhs);
  for (double p : {1.1, 1.5}) {
    const LmsSolution sol = solve_p(s.mesh, s.K, s.rhs, p);
    CHECK(sol.converged);
    CHECK(sol.iterations > 1);
    CHECK(sol.eta <= eta_lp(s.mesh, two.S, s.K, p) * (1.0 + 1e-9));
  }
  LmsControls tight;
  tight.max_iter = 1;
  const LmsSolution capped = solve_p(s.mesh, s.K, s.rhs, 1.1, tight);
  CHECK_FALSE(capped.converged);
}

TEST_CASE("eta is invariant under a rigid translation of mesh and data") {
  const Vec2 shift(0.37, -0.21);
  ProblemSpec moved = problems::example1_spec();
  const auto base_f = moved.f;
  moved.f = [base_f, shift](const Point& x) { return base_f(x - shift); };
  const Setup a = make_setup(square_mesh(3), problems::example1_spec());
  const Setup b = make_setup(translate(square_mesh(3), shift), moved);
  for (double p : {2.0, 1.1}) {
    const double ea = solve_p(a.mesh, a.K, a.rhs, p).eta;
    const double eb = solve_p(b.mesh, b.K, b.rhs, p).eta;
    CHECK(std::abs(ea - eb) <= 1e-10 * ea);
  }
}

TEST_CASE("dual norm ratio is homogeneous of degree zero") {
  const Setup s = make_setup(square_mesh(3), problems::example1_spec());
  const LmsSolution sol = solve_p2(s.mesh, s.K, s.rhs);
  VecP1Field theta = reconstruct_deformation(s.mesh, sol, s.K, 2.0).theta;
  const double r1 = dual_norm_consistency(s.mesh, s.spec, s.sa.u, s.sa.y, sol, theta, 2.0);
  for (Vec2& v : theta.values) v *= 2.0;
  const double r2 = dual_norm_consistency(s.mesh, s.spec, s.sa.u, s.sa.y, sol, theta, 2.0);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-13));
  CHECK(r1 > 0.0);
  CHECK(r1 <= sol.eta * 1.05);
  for (Vec2& v : theta.values) v = Vec2(1.0, -2.0);
  CHECK_THROWS_AS(dual_norm_consistency(s.mesh, s.spec, s.sa.u, s.sa.y, sol, theta, 2.0), ParameterError);
}

TEST_CASE("argument validation") {
  const Setup s = make_setup(square_mesh(1), problems::example1_spec());
  CHECK_THROWS_AS(solve_p(s.mesh, s.K, s.rhs, 1.0), ParameterError);
  CHECK_THROWS_AS(solve_p(s.mesh, s.K, s.rhs, 2.5), ParameterError);
  std::vector<Mat2> short_K(s.K.begin(), s.K.end() - 1);
  CHECK_THROWS_AS(solve_p2(s.mesh, short_K, s.rhs), ParameterError);
}
