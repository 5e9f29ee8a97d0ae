#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "shapeopt/linsolve.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/poisson.hpp"
#include "shapeopt/quadrature.hpp"
#include "shapeopt/shape_tensor.hpp"

namespace shapeopt {

/// Matrix field whose two rows are lowest-order Raviart-Thomas fields.
/// rows[r][e] is the flux ∫_e S_r·n_e ds through global edge e, with n_e the
/// clockwise rotation of the edge direction (low -> high vertex).
struct RT0MatrixField {
  std::array<Eigen::VectorXd, 2> rows;
};

/// One 2-vector per triangle.
struct VecP0Field {
  std::vector<Vec2> values;
};

/// One 2-vector per boundary edge, ordered like mesh.topology().boundary_edges.
struct BoundaryVecP0Field {
  std::vector<Vec2> values;
};

/// Values at the six quadrature points of every triangle.
using QuadratureValues = std::vector<std::array<double, quadrature::kNumPoints>>;

struct LmsSolution {
  RT0MatrixField S;
  VecP0Field theta;
  BoundaryVecP0Field theta_b;
  double p = 2.0;
  double eta = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Multiplier of the mean-zero constraint on theta, per row. Zero when
  /// the right-hand side satisfies the compatibility condition exactly.
  Vec2 compatibility_multiplier = Vec2::Zero();
  /// Relative residual of the full saddle point system of the last solve.
  double kkt_residual = 0.0;
  /// Relative residuals of the divergence (against mean-zero test
  /// functions) and boundary flux constraints.
  double divergence_residual = 0.0;
  double boundary_residual = 0.0;
  /// Weights of the last weighted solve (all ones for p = 2).
  QuadratureValues weights;
};

/// Right-hand sides of the divergence and normal trace constraints.
struct ConstraintRhs {
  /// ∫_τ (f ∇y_h - j'(u_h) ∇u_h) dx per triangle.
  std::vector<Vec2> volume;
  /// |e| j(u_h(midpoint)) n per boundary edge (outward n).
  std::vector<Vec2> boundary;
};

enum class LmsBackend {
  /// Local elimination to an SPD system on edge multipliers.
  Hybrid,
  /// Full saddle point system by rank-revealing sparse factorization.
  Direct,
};

struct LmsControls {
  int max_iter = 100;
  double rel_tol = 1e-6;
  double eps_rel = 1e-8;
  LmsBackend backend = LmsBackend::Hybrid;
};

ConstraintRhs assemble_constraint_rhs(const TriangleMesh& mesh, const ProblemSpec& spec,
                                      const ScalarP1Field& u, const ScalarP1Field& y);

/// Linear case p = 2.
LmsSolution solve_p2(const TriangleMesh& mesh, const std::vector<Mat2>& K,
                     const ConstraintRhs& rhs, LmsBackend backend = LmsBackend::Hybrid);

/// 1 < p <= 2 by the reweighting fixed point started from the p = 2 solution.
LmsSolution solve_p(const TriangleMesh& mesh, const std::vector<Mat2>& K,
                    const ConstraintRhs& rhs, double p, const LmsControls& controls = {});

/// S_h(x) on triangle t.
Mat2 evaluate(const TriangleMesh& mesh, const RT0MatrixField& S, int t, const Point& x);

/// (Σ_τ ∫_τ |S - K|^p)^{1/p} with the Frobenius norm, degree-4 rule.
double eta_lp(const TriangleMesh& mesh, const RT0MatrixField& S, const std::vector<Mat2>& K,
              double p);

/// Regularized misfit weights (|S - K|² + ε²)^{(p-2)/2} at quadrature points,
/// ε = eps_rel · max_τ |K_τ| (eps_rel itself when K vanishes).
QuadratureValues misfit_weights(const TriangleMesh& mesh, const RT0MatrixField& S,
                                const std::vector<Mat2>& K, double p, double eps_rel);
double regularization_floor(const std::vector<Mat2>& K, double eps_rel);

/// -J'(Ω_h)[θ] / ||∇θ||_{L^{p*}} for a continuous deformation θ.
/// Throws ParameterError when ∇θ vanishes.
double dual_norm_consistency(const TriangleMesh& mesh, const ProblemSpec& spec,
                             const ScalarP1Field& u, const ScalarP1Field& y,
                             const LmsSolution& solution, const VecP1Field& theta, double p);

/// ||∇θ||_{L^q} of a P1 vector field (Frobenius norm pointwise).
double gradient_norm(const TriangleMesh& mesh, const VecP1Field& theta, double q);

/// Global RT0 operators of one matrix row, for verification and the direct
/// backend. Unknown ordering: edge fluxes in global orientation.
struct RT0Operators {
  linsolve::SparseMatrix mass;        ///< weighted (w ψ_i, ψ_j)
  linsolve::SparseMatrix divergence;  ///< triangles x edges, ∫_τ div ψ_e
  linsolve::SparseMatrix trace;       ///< boundary edges x edges, outward flux
  /// (w K_r, ψ_e) for r = 0, 1.
  std::array<Eigen::VectorXd, 2> load;
};

RT0Operators assemble_rt0_operators(const TriangleMesh& mesh, const std::vector<Mat2>& K,
                                    const QuadratureValues& weights);

/// All-ones quadrature weights.
QuadratureValues unit_weights(const TriangleMesh& mesh);

}  // namespace shapeopt
