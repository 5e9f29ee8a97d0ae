#include "shapeopt/poisson.hpp"

#include <algorithm>
#include <memory>

#include "shapeopt/error.hpp"
#include "shapeopt/linsolve.hpp"
#include "shapeopt/quadrature.hpp"

namespace shapeopt {

std::array<Vec2, 3> barycentric_gradients(const TriangleMesh& mesh, int t) {
  const auto p = mesh.corners(t);
  const double two_area = 2.0 * mesh.signed_area(t);
  std::array<Vec2, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Point& a = p[(i + 1) % 3];
    const Point& b = p[(i + 2) % 3];
    g[i] = Vec2(a.y() - b.y(), b.x() - a.x()) / two_area;
  }
  return g;
}

double value_at(const TriangleMesh& mesh, const ScalarP1Field& field, int t, int q) {
  const Triangle& tri = mesh.triangle(t);
  const auto& qp = quadrature::kDegree4[q];
  return qp.l0 * field.values[tri[0]] + qp.l1 * field.values[tri[1]] + qp.l2 * field.values[tri[2]];
}

struct DirichletPoisson::Impl {
  TriangleMesh mesh;
  std::vector<int> dof_of_vertex;  // -1 on the boundary
  linsolve::SparseMatrix stiffness;
  linsolve::SpdFactorization factor;
  mutable double residual = 0.0;

  explicit Impl(const TriangleMesh& m) : mesh(m) {}
};

DirichletPoisson::DirichletPoisson(const TriangleMesh& mesh) : impl_(std::make_unique<Impl>(mesh)) {
  auto& d = *impl_;
  d.dof_of_vertex.assign(mesh.num_vertices(), -1);
  int ndof = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.is_boundary_vertex(v)) d.dof_of_vertex[v] = ndof++;
  if (ndof == 0) throw ParameterError("mesh has no interior vertices");

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = barycentric_gradients(mesh, t);
    const double a = mesh.signed_area(t);
    const Triangle& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i) {
      const int r = d.dof_of_vertex[tri[i]];
      if (r < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int c = d.dof_of_vertex[tri[j]];
        if (c < 0) continue;
        entries.emplace_back(r, c, a * g[i].dot(g[j]));
      }
    }
  }
  d.stiffness.resize(ndof, ndof);
  d.stiffness.setFromTriplets(entries.begin(), entries.end());
  d.factor.factorize(d.stiffness);
}

DirichletPoisson::~DirichletPoisson() = default;
DirichletPoisson::DirichletPoisson(DirichletPoisson&&) noexcept = default;
DirichletPoisson& DirichletPoisson::operator=(DirichletPoisson&&) noexcept = default;

ScalarP1Field DirichletPoisson::solve(
    const std::function<double(int, int, const Point&)>& load) const {
  const auto& d = *impl_;
  const TriangleMesh& mesh = d.mesh;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d.stiffness.rows());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto [p0, p1, p2] = mesh.corners(t);
    const auto xq = quadrature::points(p0, p1, p2);
    const double a = mesh.signed_area(t);
    const Triangle& tri = mesh.triangle(t);
    for (std::size_t q = 0; q < quadrature::kNumPoints; ++q) {
      const auto& qp = quadrature::kDegree4[q];
      const double g = qp.weight * a * load(t, static_cast<int>(q), xq[q]);
      const double lambda[3] = {qp.l0, qp.l1, qp.l2};
      for (int i = 0; i < 3; ++i) {
        const int r = d.dof_of_vertex[tri[i]];
        if (r >= 0) b[r] += g * lambda[i];
      }
    }
  }
  const Eigen::VectorXd x = d.factor.solve(b, 1e-12);
  const double res = linsolve::relative_residual(d.stiffness, x, b);
  if (!(res <= 1e-10)) throw SolverError("Poisson solve: residual above contract");
  d.residual = std::max(d.residual, res);

  ScalarP1Field out{Eigen::VectorXd::Zero(mesh.num_vertices())};
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (d.dof_of_vertex[v] >= 0) out.values[v] = x[d.dof_of_vertex[v]];
  return out;
}

double DirichletPoisson::last_residual() const { return impl_->residual; }

namespace {

ScalarP1Field adjoint_with(const DirichletPoisson& op, const TriangleMesh& mesh,
                           const ProblemSpec& spec, const ScalarP1Field& u) {
  return op.solve([&](int t, int q, const Point&) {
    return -spec.j_prime(value_at(mesh, u, t, q));
  });
}

void check_field(const TriangleMesh& mesh, const ScalarP1Field& field) {
  if (field.values.size() != mesh.num_vertices()) {
    throw ParameterError("P1 field does not match the mesh");
  }
}

}  // namespace

ScalarP1Field solve_state(const TriangleMesh& mesh, const ProblemSpec& spec) {
  DirichletPoisson op(mesh);
  return op.solve([&](int, int, const Point& x) { return spec.f(x); });
}

ScalarP1Field solve_adjoint(const TriangleMesh& mesh, const ProblemSpec& spec,
                            const ScalarP1Field& u) {
  check_field(mesh, u);
  DirichletPoisson op(mesh);
  return adjoint_with(op, mesh, spec, u);
}

StateAdjoint solve_state_adjoint(const TriangleMesh& mesh, const ProblemSpec& spec) {
  DirichletPoisson op(mesh);
  ScalarP1Field u = op.solve([&](int, int, const Point& x) { return spec.f(x); });
  ScalarP1Field y = adjoint_with(op, mesh, spec, u);
  return {std::move(u), std::move(y)};
}

double evaluate_J(const TriangleMesh& mesh, const ProblemSpec& spec, const ScalarP1Field& u) {
  check_field(mesh, u);
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.signed_area(t);
    double local = 0.0;
    for (std::size_t q = 0; q < quadrature::kNumPoints; ++q) {
      local += quadrature::kDegree4[q].weight * spec.j(value_at(mesh, u, t, static_cast<int>(q)));
    }
    total += a * local;
  }
  return total;
}

std::vector<Vec2> gradient_p0(const TriangleMesh& mesh, const ScalarP1Field& field) {
  check_field(mesh, field);
  std::vector<Vec2> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = barycentric_gradients(mesh, t);
    const Triangle& tri = mesh.triangle(t);
    out[t] = field.values[tri[0]] * g[0] + field.values[tri[1]] * g[1] + field.values[tri[2]] * g[2];
  }
  return out;
}

}  // namespace shapeopt
