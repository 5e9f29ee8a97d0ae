#include "shapeopt/shape_tensor.hpp"

#include "shapeopt/error.hpp"
#include "shapeopt/quadrature.hpp"

namespace shapeopt {

std::vector<Mat2> assemble_K_field(const TriangleMesh& mesh, const ScalarP1Field& u,
                                   const ScalarP1Field& y) {
  const auto gu = gradient_p0(mesh, u);
  const auto gy = gradient_p0(mesh, y);
  std::vector<Mat2> out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) out[t] = shape_tensor_K(gu[t], gy[t]);
  return out;
}

Mat2 vector_gradient(const TriangleMesh& mesh, const VecP1Field& field, int t) {
  const auto g = barycentric_gradients(mesh, t);
  const Triangle& tri = mesh.triangle(t);
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < 3; ++i) out += field.values[tri[i]] * g[i].transpose();
  return out;
}

double shape_derivative(const TriangleMesh& mesh, const ProblemSpec& spec, const ScalarP1Field& u,
                        const ScalarP1Field& y, const VecP1Field& chi) {
  if (static_cast<int>(chi.values.size()) != mesh.num_vertices()) {
    throw ParameterError("shape_derivative: direction needs one vector per vertex");
  }
  const auto gu = gradient_p0(mesh, u);
  const auto gy = gradient_p0(mesh, y);
  double total = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.signed_area(t);
    const Mat2 grad_chi = vector_gradient(mesh, chi, t);
    const Mat2 k = shape_tensor_K(gu[t], gy[t]);
    double local = (k.array() * grad_chi.array()).sum();

    const auto [p0, p1, p2] = mesh.corners(t);
    const auto xq = quadrature::points(p0, p1, p2);
    const Triangle& tri = mesh.triangle(t);
    double j_integral = 0.0;
    for (std::size_t q = 0; q < quadrature::kNumPoints; ++q) {
      const auto& qp = quadrature::kDegree4[q];
      const Vec2 chi_q = qp.l0 * chi.values[tri[0]] + qp.l1 * chi.values[tri[1]] +
                         qp.l2 * chi.values[tri[2]];
      local += qp.weight * spec.f(xq[q]) * gy[t].dot(chi_q);
      j_integral += qp.weight * spec.j(value_at(mesh, u, t, static_cast<int>(q)));
    }
    local += j_integral * grad_chi.trace();
    total += a * local;
  }
  return total;
}

Vec2 compatibility_residual(const TriangleMesh& mesh, const ProblemSpec& spec,
                            const ScalarP1Field& y) {
  const auto gy = gradient_p0(mesh, y);
  Vec2 total = Vec2::Zero();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto [p0, p1, p2] = mesh.corners(t);
    const auto xq = quadrature::points(p0, p1, p2);
    double f_integral = 0.0;
    for (std::size_t q = 0; q < quadrature::kNumPoints; ++q)
      f_integral += quadrature::kDegree4[q].weight * spec.f(xq[q]);
    total += mesh.signed_area(t) * f_integral * gy[t];
  }
  return total;
}

}  // namespace shapeopt
