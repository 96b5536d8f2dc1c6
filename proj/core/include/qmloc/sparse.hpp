#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qmloc/geometry.hpp"

namespace qmloc {

struct Triplet {
  Id row;
  Id col;
  double value;
};

/// Square matrix in compressed-row layout with sorted, duplicate-free columns.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  /// Duplicate entries are summed.
  static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries);

  [[nodiscard]] std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  [[nodiscard]] const std::vector<Id>& columns() const noexcept { return columns_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  [[nodiscard]] Eigen::VectorXd diagonal() const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  [[nodiscard]] bool is_symmetric(double rtol = 1e-12) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Id> columns_;
  std::vector<double> values_;
};

struct SolverOptions {
  double rtol = 1e-12;
  /// 0 means 50 * n.
  std::size_t max_iter = 0;
  bool dense_cross_check = true;
  std::size_t dense_limit = 2000;
  /// Relative energy agreement demanded from the dense cross-check.
  double cross_check_rtol = 1e-8;
};

struct SolveResult {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool cross_checked = false;
};

/// Jacobi-preconditioned conjugate gradients. Converged once the
/// preconditioned residual norm relative to that of b is <= rtol. Throws
/// SolverFailure on non-convergence, on a non-positive diagonal, or when the
/// dense cross-check disagrees.
SolveResult solve_spd(const CsrMatrix& a, const Eigen::VectorXd& b, const SolverOptions& options = {});

/// Dense Cholesky solve; SolverFailure if the matrix is not positive definite.
Eigen::VectorXd solve_dense_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace qmloc
