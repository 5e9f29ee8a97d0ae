#include "shapeopt/lms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "shapeopt/error.hpp"

namespace shapeopt {

namespace {

constexpr std::size_t kQ = quadrature::kNumPoints;

/// Geometry of one triangle needed by the RT0 assembly. psi[q][i] is the
/// local basis function with unit outward flux through edge i, evaluated at
/// quadrature point q: (x_q - P_i) / (2|τ|).
struct ElementGeometry {
  std::array<Point, 3> corners;
  std::array<int, 3> edges;
  std::array<int, 3> signs;
  double area;
  std::array<std::array<Vec2, 3>, kQ> psi;
};

std::vector<ElementGeometry> element_geometry(const TriangleMesh& mesh) {
  std::vector<ElementGeometry> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry& g = out[t];
    g.corners = mesh.corners(t);
    g.edges = mesh.triangle_edges(t);
    g.signs = mesh.triangle_edge_signs(t);
    g.area = mesh.signed_area(t);
    const auto xq = quadrature::points(g.corners[0], g.corners[1], g.corners[2]);
    for (std::size_t q = 0; q < kQ; ++q)
      for (int i = 0; i < 3; ++i) g.psi[q][i] = (xq[q] - g.corners[i]) / (2.0 * g.area);
  }
  return out;
}

Eigen::Matrix3d local_mass(const ElementGeometry& g, const std::array<double, kQ>& w) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t q = 0; q < kQ; ++q) {
    const double c = g.area * quadrature::kDegree4[q].weight * w[q];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) += c * g.psi[q][i].dot(g.psi[q][j]);
  }
  return m;
}

/// (w K_r, ψ_i) for both rows r, local outward basis.
std::array<Eigen::Vector3d, 2> local_load(const ElementGeometry& g, const std::array<double, kQ>& w,
                                          const Mat2& k) {
  std::array<Eigen::Vector3d, 2> f{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  for (std::size_t q = 0; q < kQ; ++q) {
    const double c = g.area * quadrature::kDegree4[q].weight * w[q];
    for (int r = 0; r < 2; ++r) {
      const Vec2 row = k.row(r).transpose();
      for (int i = 0; i < 3; ++i) f[r](i) += c * row.dot(g.psi[q][i]);
    }
  }
  return f;
}

/// Outcome of one weighted linear saddle point solve, both rows.
struct WeightedSolve {
  RT0MatrixField S;
  VecP0Field theta;
  BoundaryVecP0Field theta_b;
  Vec2 lambda = Vec2::Zero();
};

double domain_area(const std::vector<ElementGeometry>& geo) {
  double a = 0.0;
  for (const auto& g : geo) a += g.area;
  return a;
}

/// Per-row compatibility multiplier: the constant absorbed by the mean-zero
/// constraint on theta.
Vec2 compatibility_lambda(const std::vector<ElementGeometry>& geo, const ConstraintRhs& rhs) {
  Vec2 total = Vec2::Zero();
  for (const Vec2& g : rhs.volume) total += g;
  for (const Vec2& h : rhs.boundary) total -= h;
  return total / domain_area(geo);
}

class HybridSolver {
 public:
  explicit HybridSolver(const TriangleMesh& mesh)
      : mesh_(mesh), geo_(element_geometry(mesh)), boundary_(mesh.boundary_edges()) {}

  const std::vector<ElementGeometry>& geometry() const { return geo_; }

  WeightedSolve solve(const QuadratureValues& w, const std::vector<Mat2>& K,
                      const ConstraintRhs& rhs) {
    const int nt = mesh_.num_triangles();
    const int ne = mesh_.num_edges();
    const Vec2 lambda = compatibility_lambda(geo_, rhs);

    // Local elimination: q = P (F - μ) + M⁻¹1 G / c,  θ = (1ᵀM⁻¹(F - μ) - G) / c.
    std::vector<Eigen::Matrix3d> minv(nt);
    std::vector<Eigen::Vector3d> minv_one(nt);
    std::vector<double> c(nt);
    std::vector<std::array<Eigen::Vector3d, 2>> load(nt);
    std::vector<Vec2> g_shifted(nt);

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(9 * static_cast<std::size_t>(nt) + 1);
    std::array<Eigen::VectorXd, 2> b{Eigen::VectorXd::Zero(ne), Eigen::VectorXd::Zero(ne)};
    constexpr int kPinned = 0;

    for (int t = 0; t < nt; ++t) {
      const ElementGeometry& g = geo_[t];
      minv[t] = local_mass(g, w[t]).inverse();
      minv_one[t] = minv[t].rowwise().sum();
      c[t] = minv_one[t].sum();
      const Eigen::Matrix3d proj = minv[t] - minv_one[t] * minv_one[t].transpose() / c[t];
      load[t] = local_load(g, w[t], K[t]);
      g_shifted[t] = rhs.volume[t] - g.area * lambda;
      for (int i = 0; i < 3; ++i) {
        const int ei = g.edges[i];
        for (int j = 0; j < 3; ++j) {
          const int ej = g.edges[j];
          if (ei == kPinned || ej == kPinned) continue;
          entries.emplace_back(ei, ej, proj(i, j));
        }
        for (int r = 0; r < 2; ++r) {
          const Eigen::Vector3d local = proj * load[t][r] + minv_one[t] * g_shifted[t](r) / c[t];
          b[r](ei) += local(i);
        }
      }
    }
    for (std::size_t k = 0; k < boundary_.size(); ++k) {
      for (int r = 0; r < 2; ++r) b[r](boundary_[k].edge) -= rhs.boundary[k](r);
    }
    entries.emplace_back(kPinned, kPinned, 1.0);
    for (int r = 0; r < 2; ++r) b[r](kPinned) = 0.0;

    linsolve::SparseMatrix a(ne, ne);
    a.setFromTriplets(entries.begin(), entries.end());
    factor_.factorize(a);
    const std::array<Eigen::VectorXd, 2> mu{factor_.solve(b[0], 1e-13), factor_.solve(b[1], 1e-13)};

    WeightedSolve out;
    out.lambda = lambda;
    out.theta.values.assign(nt, Vec2::Zero());
    for (int r = 0; r < 2; ++r) out.S.rows[r] = Eigen::VectorXd::Zero(ne);
    for (int t = 0; t < nt; ++t) {
      const ElementGeometry& g = geo_[t];
      for (int r = 0; r < 2; ++r) {
        Eigen::Vector3d rhs_local = load[t][r];
        for (int i = 0; i < 3; ++i) rhs_local(i) -= mu[r](g.edges[i]);
        const double th = (minv_one[t].dot(rhs_local) - g_shifted[t](r)) / c[t];
        const Eigen::Vector3d q = minv[t] * (rhs_local - Eigen::Vector3d::Constant(th));
        out.theta.values[t](r) = th;
        for (int i = 0; i < 3; ++i) {
          if (mesh_.edge_triangles(g.edges[i])[0] == t) out.S.rows[r](g.edges[i]) = g.signs[i] * q(i);
        }
      }
    }
    // Fix the additive constant: area-weighted mean zero for theta, with the
    // edge multipliers shifted the opposite way.
    Vec2 mean = Vec2::Zero();
    for (int t = 0; t < nt; ++t) mean += geo_[t].area * out.theta.values[t];
    mean /= domain_area(geo_);
    for (auto& th : out.theta.values) th -= mean;
    out.theta_b.values.resize(boundary_.size());
    for (std::size_t k = 0; k < boundary_.size(); ++k) {
      const int e = boundary_[k].edge;
      out.theta_b.values[k] = Vec2(mu[0](e) + mean(0), mu[1](e) + mean(1));
    }
    return out;
  }

 private:
  const TriangleMesh& mesh_;
  std::vector<ElementGeometry> geo_;
  std::vector<BoundaryEdge> boundary_;
  linsolve::SpdFactorization factor_;
};

linsolve::SparseMatrix augmented_kkt(const TriangleMesh& mesh, const RT0Operators& ops,
                                     const std::vector<ElementGeometry>& geo) {
  const int ne = mesh.num_edges();
  const int nt = mesh.num_triangles();
  const int nb = mesh.num_boundary_edges();
  const int n = ne + nt + nb + 1;
  std::vector<Eigen::Triplet<double>> entries;
  const auto add_block = [&](const linsolve::SparseMatrix& m, int row0, int col0, bool mirror) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (linsolve::SparseMatrix::InnerIterator it(m, k); it; ++it) {
        entries.emplace_back(row0 + it.row(), col0 + it.col(), it.value());
        if (mirror) entries.emplace_back(col0 + it.col(), row0 + it.row(), it.value());
      }
  };
  add_block(ops.mass, 0, 0, false);
  add_block(ops.divergence, ne, 0, true);
  add_block(ops.trace, ne + nt, 0, true);
  for (int t = 0; t < nt; ++t) {
    entries.emplace_back(ne + t, n - 1, geo[t].area);
    entries.emplace_back(n - 1, ne + t, geo[t].area);
  }
  linsolve::SparseMatrix kkt(n, n);
  kkt.setFromTriplets(entries.begin(), entries.end());
  return kkt;
}

WeightedSolve solve_direct(const TriangleMesh& mesh, const std::vector<ElementGeometry>& geo,
                           const QuadratureValues& w, const std::vector<Mat2>& K,
                           const ConstraintRhs& rhs) {
  const int ne = mesh.num_edges();
  const int nt = mesh.num_triangles();
  const int nb = mesh.num_boundary_edges();
  const RT0Operators ops = assemble_rt0_operators(mesh, K, w);
  const linsolve::SparseSystem system(augmented_kkt(mesh, ops, geo), true);
  WeightedSolve out;
  out.theta.values.assign(nt, Vec2::Zero());
  out.theta_b.values.assign(nb, Vec2::Zero());
  for (int r = 0; r < 2; ++r) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(system.dimension());
    b.head(ne) = ops.load[r];
    for (int t = 0; t < nt; ++t) b(ne + t) = rhs.volume[t](r);
    for (int k = 0; k < nb; ++k) b(ne + nt + k) = rhs.boundary[k](r);
    const Eigen::VectorXd x = linsolve::solve_saddle(system, b);
    out.S.rows[r] = x.head(ne);
    for (int t = 0; t < nt; ++t) out.theta.values[t](r) = x(ne + t);
    for (int k = 0; k < nb; ++k) out.theta_b.values[k](r) = x(ne + nt + k);
    out.lambda(r) = x(system.dimension() - 1);
  }
  return out;
}

struct Residuals {
  double kkt = 0.0;
  double divergence = 0.0;
  double boundary = 0.0;
};

Residuals check_residuals(const TriangleMesh& mesh, const std::vector<ElementGeometry>& geo,
                          const QuadratureValues& w, const std::vector<Mat2>& K,
                          const ConstraintRhs& rhs, const WeightedSolve& sol) {
  const int ne = mesh.num_edges();
  const int nt = mesh.num_triangles();
  const int nb = mesh.num_boundary_edges();
  const RT0Operators ops = assemble_rt0_operators(mesh, K, w);
  const linsolve::SparseMatrix kkt = augmented_kkt(mesh, ops, geo);
  Eigen::VectorXd area(nt);
  for (int t = 0; t < nt; ++t) area(t) = geo[t].area;

  Residuals res;
  double g_norm = 0.0;
  double h_norm = 0.0;
  for (int r = 0; r < 2; ++r) {
    Eigen::VectorXd x(kkt.rows());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(kkt.rows());
    x.head(ne) = sol.S.rows[r];
    b.head(ne) = ops.load[r];
    Eigen::VectorXd g(nt);
    Eigen::VectorXd h(nb);
    for (int t = 0; t < nt; ++t) {
      x(ne + t) = sol.theta.values[t](r);
      g(t) = rhs.volume[t](r);
      b(ne + t) = g(t);
    }
    for (int k = 0; k < nb; ++k) {
      x(ne + nt + k) = sol.theta_b.values[k](r);
      h(k) = rhs.boundary[k](r);
      b(ne + nt + k) = h(k);
    }
    x(kkt.rows() - 1) = sol.lambda(r);
    res.kkt = std::max(res.kkt, linsolve::relative_residual(kkt, x, b));

    Eigen::VectorXd div_res = ops.divergence * sol.S.rows[r] - g;
    div_res -= area * (area.dot(div_res) / area.squaredNorm());
    const Eigen::VectorXd trace_res = ops.trace * sol.S.rows[r] - h;
    g_norm += g.squaredNorm();
    h_norm += h.squaredNorm();
    res.divergence = std::max(res.divergence, div_res.norm());
    res.boundary = std::max(res.boundary, trace_res.norm());
  }
  double scale = std::sqrt(g_norm) + std::sqrt(h_norm);
  if (!(scale > 0.0)) scale = 1.0;
  res.divergence /= scale;
  res.boundary /= scale;
  return res;
}

void validate_inputs(const TriangleMesh& mesh, const std::vector<Mat2>& K, const ConstraintRhs& rhs) {
  if (static_cast<int>(K.size()) != mesh.num_triangles() ||
      static_cast<int>(rhs.volume.size()) != mesh.num_triangles() ||
      static_cast<int>(rhs.boundary.size()) != mesh.num_boundary_edges()) {
    throw ParameterError("least-mean solve: field sizes do not match the mesh");
  }
}

}  // namespace

QuadratureValues unit_weights(const TriangleMesh& mesh) {
  std::array<double, kQ> ones;
  ones.fill(1.0);
  return QuadratureValues(mesh.num_triangles(), ones);
}

RT0Operators assemble_rt0_operators(const TriangleMesh& mesh, const std::vector<Mat2>& K,
                                    const QuadratureValues& weights) {
  const auto geo = element_geometry(mesh);
  const int ne = mesh.num_edges();
  const int nt = mesh.num_triangles();
  const auto boundary = mesh.boundary_edges();
  RT0Operators ops;
  std::vector<Eigen::Triplet<double>> mass;
  std::vector<Eigen::Triplet<double>> div;
  ops.load = {Eigen::VectorXd::Zero(ne), Eigen::VectorXd::Zero(ne)};
  for (int t = 0; t < nt; ++t) {
    const ElementGeometry& g = geo[t];
    const Eigen::Matrix3d m = local_mass(g, weights[t]);
    const auto f = local_load(g, weights[t], K[t]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j)
        mass.emplace_back(g.edges[i], g.edges[j], g.signs[i] * g.signs[j] * m(i, j));
      div.emplace_back(t, g.edges[i], static_cast<double>(g.signs[i]));
      for (int r = 0; r < 2; ++r) ops.load[r](g.edges[i]) += g.signs[i] * f[r](i);
    }
  }
  std::vector<Eigen::Triplet<double>> trace;
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    const int sign = mesh.triangle_edge_signs(boundary[k].triangle)[boundary[k].local];
    trace.emplace_back(static_cast<int>(k), boundary[k].edge, static_cast<double>(sign));
  }
  ops.mass.resize(ne, ne);
  ops.mass.setFromTriplets(mass.begin(), mass.end());
  ops.divergence.resize(nt, ne);
  ops.divergence.setFromTriplets(div.begin(), div.end());
  ops.trace.resize(static_cast<int>(boundary.size()), ne);
  ops.trace.setFromTriplets(trace.begin(), trace.end());
  return ops;
}

ConstraintRhs assemble_constraint_rhs(const TriangleMesh& mesh, const ProblemSpec& spec,
                                      const ScalarP1Field& u, const ScalarP1Field& y) {
  const auto gu = gradient_p0(mesh, u);
  const auto gy = gradient_p0(mesh, y);
  ConstraintRhs rhs;
  rhs.volume.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto [p0, p1, p2] = mesh.corners(t);
    const auto xq = quadrature::points(p0, p1, p2);
    double f_int = 0.0;
    double jp_int = 0.0;
    for (std::size_t q = 0; q < kQ; ++q) {
      const double wq = quadrature::kDegree4[q].weight;
      f_int += wq * spec.f(xq[q]);
      jp_int += wq * spec.j_prime(value_at(mesh, u, t, static_cast<int>(q)));
    }
    rhs.volume[t] = mesh.signed_area(t) * (f_int * gy[t] - jp_int * gu[t]);
  }
  for (const BoundaryEdge& be : mesh.boundary_edges()) {
    const Edge& e = mesh.edges()[be.edge];
    const double u_mid = 0.5 * (u.values[e.a] + u.values[e.b]);
    rhs.boundary.push_back(be.length * spec.j(u_mid) * be.normal);
  }
  return rhs;
}

Mat2 evaluate(const TriangleMesh& mesh, const RT0MatrixField& S, int t, const Point& x) {
  const auto p = mesh.corners(t);
  const auto& e = mesh.triangle_edges(t);
  const auto& s = mesh.triangle_edge_signs(t);
  const double two_area = 2.0 * mesh.signed_area(t);
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < 3; ++i) {
    const Vec2 psi = s[i] * (x - p[i]) / two_area;
    for (int r = 0; r < 2; ++r) out.row(r) += S.rows[r](e[i]) * psi.transpose();
  }
  return out;
}

double regularization_floor(const std::vector<Mat2>& K, double eps_rel) {
  double kmax = 0.0;
  for (const Mat2& k : K) kmax = std::max(kmax, k.norm());
  return kmax > 0.0 ? eps_rel * kmax : eps_rel;
}

QuadratureValues misfit_weights(const TriangleMesh& mesh, const RT0MatrixField& S,
                                const std::vector<Mat2>& K, double p, double eps_rel) {
  const double eps2 = std::pow(regularization_floor(K, eps_rel), 2);
  QuadratureValues w(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto [p0, p1, p2] = mesh.corners(t);
    const auto xq = quadrature::points(p0, p1, p2);
    for (std::size_t q = 0; q < kQ; ++q) {
      const double r2 = (evaluate(mesh, S, t, xq[q]) - K[t]).squaredNorm();
      w[t][q] = std::pow(r2 + eps2, 0.5 * (p - 2.0));
    }
  }
  return w;
}

double eta_lp(const TriangleMesh& mesh, const RT0MatrixField& S, const std::vector<Mat2>& K,
              double p) {
  if (!(p >= 1.0)) throw ParameterError("eta_lp: p must be at least 1");
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto [p0, p1, p2] = mesh.corners(t);
    const auto xq = quadrature::points(p0, p1, p2);
    double local = 0.0;
    for (std::size_t q = 0; q < kQ; ++q) {
      const double r = (evaluate(mesh, S, t, xq[q]) - K[t]).norm();
      local += quadrature::kDegree4[q].weight * std::pow(r, p);
    }
    total += mesh.signed_area(t) * local;
  }
  return std::pow(total, 1.0 / p);
}

namespace {

LmsSolution run_fixed_point(const TriangleMesh& mesh, const std::vector<Mat2>& K,
                            const ConstraintRhs& rhs, double p, const LmsControls& controls) {
  validate_inputs(mesh, K, rhs);
  if (!(p > 1.0 && p <= 2.0)) throw ParameterError("least-mean solve requires 1 < p <= 2");
  if (controls.max_iter < 1 || !(controls.rel_tol > 0.0) || !(controls.eps_rel > 0.0)) {
    throw ParameterError("least-mean solve: invalid controls");
  }
  HybridSolver hybrid(mesh);
  const auto& geo = hybrid.geometry();
  const auto solve = [&](const QuadratureValues& w) {
    return controls.backend == LmsBackend::Hybrid ? hybrid.solve(w, K, rhs)
                                                  : solve_direct(mesh, geo, w, K, rhs);
  };

  QuadratureValues weights = unit_weights(mesh);
  WeightedSolve current = solve(weights);
  double eta = eta_lp(mesh, current.S, K, p);
  int iterations = 1;
  bool converged = p == 2.0;

  WeightedSolve best = current;
  QuadratureValues best_weights = weights;
  double best_eta = eta;
  while (!converged && iterations <= controls.max_iter) {
    weights = misfit_weights(mesh, current.S, K, p, controls.eps_rel);
    current = solve(weights);
    ++iterations;
    const double next = eta_lp(mesh, current.S, K, p);
    converged = std::abs(next - eta) <= controls.rel_tol * next;
    eta = next;
    if (eta <= best_eta || converged) {
      best = current;
      best_weights = weights;
      best_eta = eta;
    }
  }

  LmsSolution out;
  const Residuals res = check_residuals(mesh, geo, best_weights, K, rhs, best);
  out.S = std::move(best.S);
  out.theta = std::move(best.theta);
  out.theta_b = std::move(best.theta_b);
  out.compatibility_multiplier = best.lambda;
  out.p = p;
  out.eta = best_eta;
  out.iterations = iterations;
  out.converged = converged;
  out.kkt_residual = res.kkt;
  out.divergence_residual = res.divergence;
  out.boundary_residual = res.boundary;
  out.weights = std::move(best_weights);
  if (!(res.kkt <= 1e-10)) {
    throw SolverError("least-mean solve: saddle point residual " + std::to_string(res.kkt) +
                      " above contract");
  }
  if (!(res.divergence <= 1e-9) || !(res.boundary <= 1e-9)) {
    throw SolverError("least-mean solve: constraint residuals " + std::to_string(res.divergence) +
                      ", " + std::to_string(res.boundary) + " above contract");
  }
  return out;
}

}  // namespace

LmsSolution solve_p2(const TriangleMesh& mesh, const std::vector<Mat2>& K,
                     const ConstraintRhs& rhs, LmsBackend backend) {
  LmsControls controls;
  controls.backend = backend;
  return run_fixed_point(mesh, K, rhs, 2.0, controls);
}

LmsSolution solve_p(const TriangleMesh& mesh, const std::vector<Mat2>& K,
                    const ConstraintRhs& rhs, double p, const LmsControls& controls) {
  return run_fixed_point(mesh, K, rhs, p, controls);
}

double gradient_norm(const TriangleMesh& mesh, const VecP1Field& theta, double q) {
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    total += mesh.signed_area(t) * std::pow(vector_gradient(mesh, theta, t).norm(), q);
  }
  return std::pow(total, 1.0 / q);
}

double dual_norm_consistency(const TriangleMesh& mesh, const ProblemSpec& spec,
                             const ScalarP1Field& u, const ScalarP1Field& y,
                             const LmsSolution& solution, const VecP1Field& theta, double p) {
  if (static_cast<int>(theta.values.size()) != mesh.num_vertices()) {
    throw ParameterError("dual_norm_consistency: deformation needs one vector per vertex");
  }
  (void)solution;
  const double p_star = p / (p - 1.0);
  const double denom = gradient_norm(mesh, theta, p_star);
  // A constant field has a gradient at round-off level only.
  double size = 0.0;
  for (const Vec2& v : theta.values) size = std::max(size, v.norm());
  const double floor = 1e-12 * size * std::pow(area(mesh), 1.0 / p_star) / diameter(mesh);
  if (!(denom > floor)) throw ParameterError("dual_norm_consistency: deformation has zero gradient");
  return -shape_derivative(mesh, spec, u, y, theta) / denom;
}

}  // namespace shapeopt
