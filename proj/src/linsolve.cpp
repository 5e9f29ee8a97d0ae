#include "shapeopt/linsolve.hpp"

#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>

#include "shapeopt/error.hpp"

namespace shapeopt::linsolve {

namespace {

constexpr double kSpdTolerance = 1e-12;
constexpr double kSaddleTolerance = 1e-10;

bool structurally_symmetric(const SparseMatrix& m) {
  const SparseMatrix t = m.transpose();
  const SparseMatrix diff = m - t;
  const double scale = m.norm();
  return diff.norm() <= 1e-14 * (scale > 0.0 ? scale : 1.0);
}

}  // namespace

SparseSystem::SparseSystem(SparseMatrix m, bool is_symmetric)
    : matrix(std::move(m)), symmetric(is_symmetric) {
  if (matrix.rows() != matrix.cols()) throw ParameterError("sparse system must be square");
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      if (!std::isfinite(it.value())) throw ParameterError("sparse system has a non-finite entry");
    }
  }
  if (symmetric && !structurally_symmetric(matrix)) {
    throw ParameterError("sparse system flagged symmetric but is not");
  }
}

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  const double r = (a * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

Vector solve_spd(const SparseSystem& system, const Vector& rhs) {
  if (rhs.size() != system.dimension()) throw ParameterError("solve_spd: rhs size mismatch");
  SpdFactorization factor;
  factor.factorize(system.matrix);
  Vector x = factor.solve(rhs, kSpdTolerance);
  const double res = relative_residual(system.matrix, x, rhs);
  if (!(res <= kSpdTolerance)) {
    throw SolverError("solve_spd: relative residual " + std::to_string(res) + " above contract");
  }
  return x;
}

Vector solve_saddle(const SparseSystem& system, const Vector& rhs) {
  if (rhs.size() != system.dimension()) throw ParameterError("solve_saddle: rhs size mismatch");
  SparseMatrix a = system.matrix;
  a.makeCompressed();
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  // Absolute threshold relative to the matrix scale so that an exact kernel
  // shows up as rank deficiency instead of a huge solution.
  double scale = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  qr.setPivotThreshold(1e-11 * (scale > 0.0 ? scale : 1.0));
  qr.compute(a);
  if (qr.info() != Eigen::Success) throw SolverError("solve_saddle: factorization failed");
  if (qr.rank() < a.cols()) {
    const int column = qr.colsPermutation().indices()(qr.rank());
    throw SolverError("solve_saddle: singular system, near-zero pivot at column " +
                      std::to_string(column) + " (rank " + std::to_string(qr.rank()) + " of " +
                      std::to_string(a.cols()) + ")");
  }
  Vector x = qr.solve(rhs);
  // One refinement sweep recovers digits lost to the orthogonal factor.
  x += qr.solve(Vector(rhs - a * x));
  const double res = relative_residual(a, x, rhs);
  if (!(res <= kSaddleTolerance)) {
    throw SolverError("solve_saddle: relative residual " + std::to_string(res) + " above contract");
  }
  return x;
}

struct SpdFactorization::Impl {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  SparseMatrix matrix;
  Eigen::Index analyzed_rows = -1;
  Eigen::Index analyzed_nnz = -1;
};

SpdFactorization::SpdFactorization() : impl_(std::make_unique<Impl>()) {}
SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

void SpdFactorization::factorize(const SparseMatrix& matrix) {
  impl_->matrix = matrix;
  impl_->matrix.makeCompressed();
  if (impl_->analyzed_rows != matrix.rows() || impl_->analyzed_nnz != impl_->matrix.nonZeros()) {
    impl_->ldlt.analyzePattern(impl_->matrix);
    impl_->analyzed_rows = matrix.rows();
    impl_->analyzed_nnz = impl_->matrix.nonZeros();
  }
  impl_->ldlt.factorize(impl_->matrix);
  if (impl_->ldlt.info() != Eigen::Success) {
    throw SolverError("sparse Cholesky: factorization failed");
  }
  const auto& d = impl_->ldlt.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) {
      throw SolverError("sparse Cholesky: non-positive pivot at index " + std::to_string(i));
    }
  }
}

Vector SpdFactorization::solve(const Vector& rhs, double tolerance) const {
  Vector x = impl_->ldlt.solve(rhs);
  for (int sweep = 0; sweep < 3; ++sweep) {
    const Vector r = rhs - impl_->matrix.selfadjointView<Eigen::Lower>() * x;
    const double nb = rhs.norm();
    if (r.norm() <= tolerance * (nb > 0.0 ? nb : 1.0)) break;
    x += impl_->ldlt.solve(r);
  }
  return x;
}

}  // namespace shapeopt::linsolve
