#pragma once

#include <array>
#include <vector>

#include "shapeopt/lms.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/quadrature.hpp"
#include "shapeopt/shape_tensor.hpp"

namespace shapeopt {

/// Matrix values at the quadrature points of one triangle.
using QuadratureMatrices = std::array<Mat2, quadrature::kNumPoints>;

/// x -> gradient (x - anchor) + value on one triangle.
struct AffineMap {
  Mat2 gradient = Mat2::Zero();
  Point anchor = Point::Zero();
  Vec2 value = Vec2::Zero();

  [[nodiscard]] Vec2 operator()(const Point& x) const { return gradient * (x - anchor) + value; }
};

struct GradientFit {
  Mat2 gradient = Mat2::Zero();
  int newton_steps = 0;
  /// Newton did not converge and the L² mean was returned instead.
  bool fallback = false;
};

/// Gradient target w (S_h - K) at the quadrature points of triangle t, with
/// the regularized weights of the least-mean solver.
QuadratureMatrices misfit_target(const TriangleMesh& mesh, const RT0MatrixField& S,
                                 const std::vector<Mat2>& K, int t, double p, double eps);

/// Σ_q ω_q (|A - G_q|² + δ²)^{p*/2}, the local objective (δ = 0 gives the
/// unregularized p*-th power of the L^{p*} norm divided by |τ|).
double local_fit_objective(const QuadratureMatrices& target, const Mat2& a, double p, double delta);

/// Constant matrix closest to the target in L^{p*}(τ), p* = p / (p - 1).
/// p = 2 is the quadrature mean; otherwise damped Newton from that mean.
GradientFit local_gradient_fit(const QuadratureMatrices& target, double p,
                               double delta_rel = 1e-8);

/// Affine map with the given gradient whose τ-mean is theta_t (anchored at
/// the centroid).
AffineMap local_value_fit(const TriangleMesh& mesh, int t, const Mat2& gradient, const Vec2& theta_t);

/// Vertex values as the plain mean over the incident triangles' maps.
VecP1Field vertex_average(const TriangleMesh& mesh, const std::vector<AffineMap>& maps);

struct Reconstruction {
  VecP1Field theta;
  /// Triangles where the local Newton fit fell back to the L² mean.
  int fallback_count = 0;
};

/// Continuous deformation from the least-mean solution: local gradient fit,
/// centroid value fit, vertex averaging, then shift to area-weighted mean zero.
Reconstruction reconstruct_deformation(const TriangleMesh& mesh, const LmsSolution& solution,
                                       const std::vector<Mat2>& K, double p,
                                       double eps_rel = 1e-8);

/// ||∇θ - w (S_h - K)||_{L^{p*}} with the degree-4 rule.
double gradient_misfit_norm(const TriangleMesh& mesh, const VecP1Field& theta,
                            const LmsSolution& solution, const std::vector<Mat2>& K, double p,
                            double eps_rel = 1e-8);

}  // namespace shapeopt
