#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shapeopt/mesh.hpp"

namespace shapeopt {

/// Shape optimization problem: state equation -Δu = f with u = 0 on the
/// boundary, objective J(Ω) = ∫ j(u).
struct ProblemSpec {
  std::string name;
  std::function<double(const Point&)> f;
  std::function<double(double)> j;
  std::function<double(double)> j_prime;
};

/// Continuous piecewise linear field, one value per mesh vertex.
struct ScalarP1Field {
  Eigen::VectorXd values;
};

/// P1 Dirichlet Laplacian on a mesh, assembled and factorized once so that
/// the state and adjoint problems share the factorization.
class DirichletPoisson {
 public:
  explicit DirichletPoisson(const TriangleMesh& mesh);
  ~DirichletPoisson();
  DirichletPoisson(DirichletPoisson&&) noexcept;
  DirichletPoisson& operator=(DirichletPoisson&&) noexcept;

  /// Solves (∇u, ∇v) = ∫ g v for all P1 v vanishing on the boundary, where
  /// the load integrand g is evaluated at the degree-4 quadrature points of
  /// each triangle: g(t, q, x_q).
  [[nodiscard]] ScalarP1Field solve(
      const std::function<double(int, int, const Point&)>& load) const;

  /// Largest relative residual of the Galerkin system seen so far.
  [[nodiscard]] double last_residual() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// State u_h: (∇u_h, ∇v_h) = (f, v_h).
ScalarP1Field solve_state(const TriangleMesh& mesh, const ProblemSpec& spec);

/// Adjoint y_h: (∇y_h, ∇z_h) = -(j'(u_h), z_h).
ScalarP1Field solve_adjoint(const TriangleMesh& mesh, const ProblemSpec& spec,
                            const ScalarP1Field& u);

struct StateAdjoint {
  ScalarP1Field u;
  ScalarP1Field y;
};
/// State and adjoint with a single factorization.
StateAdjoint solve_state_adjoint(const TriangleMesh& mesh, const ProblemSpec& spec);

/// J(Ω_h) = ∫ j(u_h) by the degree-4 rule.
double evaluate_J(const TriangleMesh& mesh, const ProblemSpec& spec, const ScalarP1Field& u);

/// Constant gradient of a P1 field on every triangle.
std::vector<Vec2> gradient_p0(const TriangleMesh& mesh, const ScalarP1Field& field);

/// Gradients of the three barycentric coordinates of triangle t.
std::array<Vec2, 3> barycentric_gradients(const TriangleMesh& mesh, int t);

/// Value of a P1 field at quadrature point q of triangle t.
double value_at(const TriangleMesh& mesh, const ScalarP1Field& field, int t, int q);

}  // namespace shapeopt
