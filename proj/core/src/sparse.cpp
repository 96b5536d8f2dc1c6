#include "qmloc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmloc/error.hpp"

namespace qmloc {

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    QMLOC_THROW_IF(t.row >= n || t.col >= n, ErrorCode::InvalidInput, "triplet index out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  CsrMatrix m;
  m.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < entries.size();) {
    const Id r = entries[i].row, c = entries[i].col;
    double v = 0.0;
    for (; i < entries.size() && entries[i].row == r && entries[i].col == c; ++i) v += entries[i].value;
    m.columns_.push_back(c);
    m.values_.push_back(v);
    ++m.offsets_[r + 1];
  }
  for (std::size_t r = 0; r < n; ++r) m.offsets_[r + 1] += m.offsets_[r];
  return m;
}

void CsrMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const std::size_t n = size();
  y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) s += values_[p] * x[columns_[p]];
    y[static_cast<Eigen::Index>(r)] = s;
  }
}

Eigen::VectorXd CsrMatrix::diagonal() const {
  const std::size_t n = size();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
      if (columns_[p] == r) d[static_cast<Eigen::Index>(r)] = values_[p];
    }
  }
  return d;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) d(static_cast<Eigen::Index>(r), columns_[p]) = values_[p];
  }
  return d;
}

bool CsrMatrix::is_symmetric(double rtol) const {
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  auto lookup = [&](Id r, Id c) {
    const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[r]);
    const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    return it != last && *it == c ? values_[static_cast<std::size_t>(it - columns_.begin())] : 0.0;
  };
  for (std::size_t r = 0; r < size(); ++r) {
    for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
      if (std::abs(values_[p] - lookup(columns_[p], static_cast<Id>(r))) > rtol * scale) return false;
    }
  }
  return true;
}

Eigen::VectorXd solve_dense_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  QMLOC_THROW_IF(llt.info() != Eigen::Success, ErrorCode::SolverFailure, "matrix is not positive definite");
  return llt.solve(b);
}

SolveResult solve_spd(const CsrMatrix& a, const Eigen::VectorXd& b, const SolverOptions& options) {
  const std::size_t n = a.size();
  QMLOC_THROW_IF(static_cast<std::size_t>(b.size()) != n, ErrorCode::InvalidInput, "right-hand side size mismatch");
  SolveResult res;
  res.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (n == 0) return res;

  const Eigen::VectorXd d = a.diagonal();
  QMLOC_THROW_IF((d.array() <= 0.0).any(), ErrorCode::SolverFailure, "non-positive diagonal entry");
  const Eigen::VectorXd dinv = d.cwiseInverse();

  Eigen::VectorXd r = b;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  double rz = r.dot(z);
  const double rz0 = rz;
  const std::size_t max_iter = options.max_iter == 0 ? 50 * n : options.max_iter;

  if (rz0 > 0.0) {
    Eigen::VectorXd p = z;
    Eigen::VectorXd q(static_cast<Eigen::Index>(n));
    bool converged = false;
    while (res.iterations < max_iter) {
      a.multiply(p, q);
      const double pq = p.dot(q);
      QMLOC_THROW_IF(!(pq > 0.0), ErrorCode::SolverFailure,
                     "matrix is not positive definite (p'Ap = " + std::to_string(pq) + ")");
      const double step = rz / pq;
      res.x += step * p;
      r -= step * q;
      z = dinv.cwiseProduct(r);
      const double rz_next = r.dot(z);
      ++res.iterations;
      res.residual = std::sqrt(std::max(rz_next, 0.0) / rz0);
      if (res.residual <= options.rtol) {
        converged = true;
        break;
      }
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    if (!converged) {
      throw Error(ErrorCode::SolverFailure, "CG stalled after " + std::to_string(res.iterations) +
                                                " iterations, relative residual " + std::to_string(res.residual));
    }
  }

  if (options.dense_cross_check && n <= options.dense_limit) {
    const Eigen::VectorXd y = solve_dense_spd(a.to_dense(), b);
    const double e_cg = res.x.dot(b);
    const double e_dense = y.dot(b);
    const double scale = std::max(std::abs(e_cg), std::abs(e_dense));
    if (std::abs(e_cg - e_dense) > options.cross_check_rtol * scale + 1e-300) {
      throw Error(ErrorCode::SolverFailure, "CG and dense energies disagree: " + std::to_string(e_cg) + " vs " +
                                                std::to_string(e_dense));
    }
    res.cross_checked = true;
  }
  return res;
}

}  // namespace qmloc
