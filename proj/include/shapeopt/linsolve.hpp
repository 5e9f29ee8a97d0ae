#pragma once

#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace shapeopt::linsolve {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

/// Square sparse system matrix. `symmetric` records that the caller assembled
/// a symmetric operator; it is checked structurally on construction.
struct SparseSystem {
  SparseMatrix matrix;
  bool symmetric = false;

  SparseSystem() = default;
  SparseSystem(SparseMatrix m, bool is_symmetric);

  [[nodiscard]] Eigen::Index dimension() const { return matrix.rows(); }
};

/// ||A x - b|| / ||b||, or ||A x|| when b = 0.
double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b);

/// Solves an SPD system by sparse Cholesky. Throws SolverError on a
/// non-positive pivot or when the relative residual exceeds 1e-12.
Vector solve_spd(const SparseSystem& system, const Vector& rhs);

/// Solves a symmetric indefinite (saddle point) system with a
/// rank-revealing sparse factorization. Throws SolverError naming the first
/// deficient column when the matrix is numerically singular, or when the
/// relative residual exceeds 1e-10.
Vector solve_saddle(const SparseSystem& system, const Vector& rhs);

/// Sparse Cholesky that keeps its symbolic analysis across refactorizations
/// of matrices with an identical sparsity pattern.
class SpdFactorization {
 public:
  SpdFactorization();
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  /// Numeric factorization; the symbolic pass is redone only when the
  /// pattern (dimension and nonzero count) changes.
  void factorize(const SparseMatrix& matrix);
  /// Solve with the current factor followed by iterative refinement until
  /// the relative residual is below `tolerance` (at most a few sweeps).
  [[nodiscard]] Vector solve(const Vector& rhs, double tolerance = 1e-12) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace shapeopt::linsolve
