#include "shapeopt/reconstruct.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "shapeopt/error.hpp"

namespace shapeopt {

namespace {

constexpr std::size_t kQ = quadrature::kNumPoints;

double conjugate(double p) { return p / (p - 1.0); }

Mat2 quadrature_mean(const QuadratureMatrices& target) {
  Mat2 mean = Mat2::Zero();
  for (std::size_t q = 0; q < kQ; ++q) mean += quadrature::kDegree4[q].weight * target[q];
  return mean;
}

Eigen::Vector4d flat(const Mat2& m) { return Eigen::Map<const Eigen::Vector4d>(m.data()); }

}  // namespace

QuadratureMatrices misfit_target(const TriangleMesh& mesh, const RT0MatrixField& S,
                                 const std::vector<Mat2>& K, int t, double p, double eps) {
  const auto [p0, p1, p2] = mesh.corners(t);
  const auto xq = quadrature::points(p0, p1, p2);
  QuadratureMatrices out;
  for (std::size_t q = 0; q < kQ; ++q) {
    const Mat2 r = evaluate(mesh, S, t, xq[q]) - K[t];
    const double w = p == 2.0 ? 1.0 : std::pow(r.squaredNorm() + eps * eps, 0.5 * (p - 2.0));
    out[q] = w * r;
  }
  return out;
}

double local_fit_objective(const QuadratureMatrices& target, const Mat2& a, double p, double delta) {
  const double ps = conjugate(p);
  double total = 0.0;
  for (std::size_t q = 0; q < kQ; ++q) {
    total += quadrature::kDegree4[q].weight *
             std::pow((a - target[q]).squaredNorm() + delta * delta, 0.5 * ps);
  }
  return total;
}

GradientFit local_gradient_fit(const QuadratureMatrices& target, double p, double delta_rel) {
  if (!(p > 1.0 && p <= 2.0)) throw ParameterError("local_gradient_fit: p must lie in (1, 2]");
  GradientFit fit;
  const Mat2 mean = quadrature_mean(target);
  fit.gradient = mean;
  if (p == 2.0) return fit;

  double scale = 0.0;
  for (const Mat2& g : target) scale = std::max(scale, g.norm());
  if (scale == 0.0) return fit;

  // Work in units where the largest target entry has norm one.
  QuadratureMatrices g;
  for (std::size_t q = 0; q < kQ; ++q) g[q] = target[q] / scale;
  const double ps = conjugate(p);
  const double d2 = delta_rel * delta_rel;
  Eigen::Vector4d a = flat(mean / scale);

  const auto objective = [&](const Eigen::Vector4d& x) {
    double total = 0.0;
    for (std::size_t q = 0; q < kQ; ++q)
      total += quadrature::kDegree4[q].weight * std::pow((x - flat(g[q])).squaredNorm() + d2, 0.5 * ps);
    return total;
  };

  double phi = objective(a);
  for (int step = 0; step < 50; ++step) {
    Eigen::Vector4d grad = Eigen::Vector4d::Zero();
    Eigen::Matrix4d hess = Eigen::Matrix4d::Zero();
    double grad_scale = 0.0;
    for (std::size_t q = 0; q < kQ; ++q) {
      const double wq = quadrature::kDegree4[q].weight;
      const Eigen::Vector4d r = a - flat(g[q]);
      const double s = r.squaredNorm() + d2;
      const double c1 = ps * std::pow(s, 0.5 * ps - 1.0);
      const double c2 = ps * (ps - 2.0) * std::pow(s, 0.5 * ps - 2.0);
      grad += wq * c1 * r;
      hess += wq * (c1 * Eigen::Matrix4d::Identity() + c2 * r * r.transpose());
      grad_scale += wq * ps * std::pow(s, 0.5 * (ps - 1.0));
    }
    if (grad.norm() <= 1e-10 * grad_scale) {
      fit.gradient = Eigen::Map<const Mat2>(a.data()) * scale;
      fit.newton_steps = step;
      return fit;
    }
    const Eigen::Vector4d dir = -hess.ldlt().solve(grad);
    double t = 1.0;
    Eigen::Vector4d next = a + dir;
    double phi_next = objective(next);
    while (phi_next > phi && t > 1e-12) {
      t *= 0.5;
      next = a + t * dir;
      phi_next = objective(next);
    }
    if (phi_next > phi) break;
    const bool stalled = (next - a).norm() <= 1e-15 * std::max(1.0, a.norm());
    a = next;
    phi = phi_next;
    fit.newton_steps = step + 1;
    if (stalled) {
      fit.gradient = Eigen::Map<const Mat2>(a.data()) * scale;
      return fit;
    }
  }
  fit.gradient = mean;
  fit.fallback = true;
  return fit;
}

AffineMap local_value_fit(const TriangleMesh& mesh, int t, const Mat2& gradient, const Vec2& theta_t) {
  return AffineMap{gradient, mesh.centroid(t), theta_t};
}

VecP1Field vertex_average(const TriangleMesh& mesh, const std::vector<AffineMap>& maps) {
  if (static_cast<int>(maps.size()) != mesh.num_triangles()) {
    throw ParameterError("vertex_average: one affine map per triangle required");
  }
  VecP1Field out;
  out.values.assign(mesh.num_vertices(), Vec2::Zero());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& patch = mesh.vertex_triangles(v);
    for (int t : patch) out.values[v] += maps[t](mesh.vertex(v));
    out.values[v] /= static_cast<double>(patch.size());
  }
  return out;
}

Reconstruction reconstruct_deformation(const TriangleMesh& mesh, const LmsSolution& solution,
                                       const std::vector<Mat2>& K, double p, double eps_rel) {
  if (static_cast<int>(solution.theta.values.size()) != mesh.num_triangles()) {
    throw ParameterError("reconstruct_deformation: solution does not belong to this mesh");
  }
  const double eps = regularization_floor(K, eps_rel);
  Reconstruction out;
  std::vector<AffineMap> maps(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const GradientFit fit = local_gradient_fit(misfit_target(mesh, solution.S, K, t, p, eps), p, eps_rel);
    if (fit.fallback) ++out.fallback_count;
    maps[t] = local_value_fit(mesh, t, fit.gradient, solution.theta.values[t]);
  }
  out.theta = vertex_average(mesh, maps);

  // Area-weighted mean of a P1 field: each triangle contributes |τ| times the
  // average of its vertex values.
  Vec2 mean = Vec2::Zero();
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    const double a = mesh.signed_area(t);
    mean += a * (out.theta.values[tri[0]] + out.theta.values[tri[1]] + out.theta.values[tri[2]]) / 3.0;
    total += a;
  }
  mean /= total;
  for (Vec2& v : out.theta.values) v -= mean;
  return out;
}

double gradient_misfit_norm(const TriangleMesh& mesh, const VecP1Field& theta,
                            const LmsSolution& solution, const std::vector<Mat2>& K, double p,
                            double eps_rel) {
  const double eps = regularization_floor(K, eps_rel);
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Mat2 grad = vector_gradient(mesh, theta, t);
    total += mesh.signed_area(t) *
             local_fit_objective(misfit_target(mesh, solution.S, K, t, p, eps), grad, p, 0.0);
  }
  return std::pow(total, 1.0 / conjugate(p));
}

}  // namespace shapeopt
