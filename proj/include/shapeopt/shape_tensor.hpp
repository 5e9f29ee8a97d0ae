#pragma once

#include <vector>

#include <Eigen/Core>

#include "shapeopt/mesh.hpp"
#include "shapeopt/poisson.hpp"

namespace shapeopt {

/// Continuous piecewise linear vector field, one 2-vector per vertex.
struct VecP1Field {
  std::vector<Vec2> values;
};

/// A(M) = tr(M) I - M - M^T for a square matrix of any size.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
amap(const Eigen::MatrixBase<Derived>& m) {
  using Out = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime,
                            Derived::ColsAtCompileTime>;
  Out out = -m - m.transpose();
  out.diagonal().array() += m.trace();
  return out;
}

/// Shape tensor K = (∇u·∇y) I - ∇y⊗∇u - ∇u⊗∇y for gradients of any dimension.
inline Eigen::MatrixXd shape_tensor_K(const Eigen::VectorXd& grad_u, const Eigen::VectorXd& grad_y) {
  Eigen::MatrixXd k = -grad_y * grad_u.transpose() - grad_u * grad_y.transpose();
  k.diagonal().array() += grad_u.dot(grad_y);
  return k;
}

inline Mat2 shape_tensor_K(const Vec2& grad_u, const Vec2& grad_y) {
  Mat2 k = -grad_y * grad_u.transpose() - grad_u * grad_y.transpose();
  k.diagonal().array() += grad_u.dot(grad_y);
  return k;
}

/// Per-triangle K(u_h, y_h); constant on each triangle for P1 fields.
std::vector<Mat2> assemble_K_field(const TriangleMesh& mesh, const ScalarP1Field& u,
                                   const ScalarP1Field& y);

/// Volume form of the shape derivative in direction chi:
///   J'(Ω)[χ] = (K, ∇χ) + (f ∇y, χ) + (j(u), div χ).
double shape_derivative(const TriangleMesh& mesh, const ProblemSpec& spec, const ScalarP1Field& u,
                        const ScalarP1Field& y, const VecP1Field& chi);

/// (∫ f ∂₁y_h, ∫ f ∂₂y_h): the shape derivative along the two translations.
Vec2 compatibility_residual(const TriangleMesh& mesh, const ProblemSpec& spec,
                            const ScalarP1Field& y);

/// Row-wise gradient of a P1 vector field on triangle t; row i is ∇χ_i.
Mat2 vector_gradient(const TriangleMesh& mesh, const VecP1Field& field, int t);

}  // namespace shapeopt
