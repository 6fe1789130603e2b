#include "tangentia/minimax.hpp"

#include <cmath>
#include <limits>

#include "tangentia/errors.hpp"
#include "tangentia/kernels.hpp"

namespace tangentia::nonsmooth {

namespace {

constexpr double kPivotTol = 1e-11;

// Dense tableau simplex for  max c.z  s.t.  A z = b, z >= 0, b >= 0.
// Columns [0, cols) are structural; one artificial per row follows.
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) : rows_(a.rows()), cols_(a.cols()) {
    t_ = Eigen::MatrixXd::Zero(rows_, cols_ + rows_ + 1);
    t_.leftCols(cols_) = a;
    t_.block(0, cols_, rows_, rows_).setIdentity();
    t_.col(cols_ + rows_) = b;
    basis_.resize(rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) basis_[r] = cols_ + r;
  }

  // Runs simplex iterations for cost vector `cost` (over all columns incl. artificials);
  // columns with `allowed[j] == false` never enter.
  void optimise(const Eigen::VectorXd& cost, const std::vector<bool>& allowed, int& pivots) {
    const Eigen::Index total = cols_ + rows_;
    for (int iter = 0; iter < 20000; ++iter) {
      Eigen::VectorXd cb(rows_);
      for (Eigen::Index r = 0; r < rows_; ++r) cb[r] = cost[basis_[r]];
      // Bland's rule: first improving column.
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < total; ++j) {
        if (!allowed[j] || is_basic(j)) continue;
        const double reduced = cost[j] - cb.dot(t_.col(j));
        if (reduced > 1e-12) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows_; ++r) {
        const double coef = t_(r, enter);
        if (coef <= kPivotTol) continue;
        const double ratio = t_(r, total) / coef;
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave >= 0 && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) throw ConsistencyError("chebyshev_fit: unbounded dual (degenerate direction set)");
      pivot(leave, enter);
      ++pivots;
    }
    throw ConsistencyError("chebyshev_fit: simplex iteration limit reached");
  }

  void pivot(Eigen::Index r, Eigen::Index j) {
    t_.row(r) /= t_(r, j);
    for (Eigen::Index i = 0; i < rows_; ++i)
      if (i != r && t_(i, j) != 0.0) t_.row(i) -= t_(i, j) * t_.row(r);
    basis_[r] = j;
  }

  bool is_basic(Eigen::Index j) const {
    for (auto b : basis_)
      if (b == j) return true;
    return false;
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  double at(Eigen::Index r, Eigen::Index j) const { return t_(r, j); }
  double rhs(Eigen::Index r) const { return t_(r, cols_ + rows_); }

 private:
  Eigen::Index rows_, cols_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

ChebyshevFit chebyshev_fit(const PointBatch& coords, std::span<const double> values) {
  const int m = coords.dim;
  const std::size_t count = values.size();
  if (m < 1 || m > kMaxDim) throw ArgumentError("chebyshev_fit: coordinate dimension must be 1..3");
  if (coords.size() != count || count == 0) throw ArgumentError("chebyshev_fit: need one value per direction");

  const Eigen::Index rows = m + 1;
  const Eigen::Index cols = static_cast<Eigen::Index>(2 * count);
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols + rows);
  for (std::size_t i = 0; i < count; ++i) {
    const auto u = static_cast<Eigen::Index>(i), v = static_cast<Eigen::Index>(count + i);
    for (int d = 0; d < m; ++d) {
      a(d, u) = coords.coord[d][i];
      a(d, v) = -coords.coord[d][i];
    }
    a(m, u) = 1.0;
    a(m, v) = 1.0;
    cost[u] = values[i];
    cost[v] = -values[i];
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  b[m] = 1.0;

  Tableau tab(a, b);
  ChebyshevFit fit;

  // Phase 1: drive the artificials to zero.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols + rows);
  phase1.tail(rows).setConstant(-1.0);
  std::vector<bool> all(static_cast<std::size_t>(cols + rows), true);
  tab.optimise(phase1, all, fit.pivots);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (tab.basis()[r] < cols) continue;
    if (tab.rhs(r) > 1e-9) throw ConsistencyError("chebyshev_fit: infeasible dual");
    for (Eigen::Index j = 0; j < cols; ++j)
      if (std::abs(tab.at(r, j)) > 1e-9 && !tab.is_basic(j)) {
        tab.pivot(r, j);
        break;
      }
  }
  for (Eigen::Index r = 0; r < rows; ++r)
    if (tab.basis()[r] >= cols)
      throw ConsistencyError("chebyshev_fit: directions do not span the coordinate space");

  // Phase 2 over structural columns only.
  std::vector<bool> structural(static_cast<std::size_t>(cols + rows), false);
  std::fill(structural.begin(), structural.begin() + cols, true);
  tab.optimise(cost, structural, fit.pivots);

  // Simplex multipliers y with B^T y = c_B give (l, t).
  Eigen::MatrixXd basis_cols(rows, rows);
  Eigen::VectorXd cb(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    basis_cols.col(r) = a.col(tab.basis()[r]);
    cb[r] = cost[tab.basis()[r]];
  }
  const Eigen::VectorXd y = basis_cols.transpose().fullPivLu().solve(cb);
  fit.coefficients.assign(y.data(), y.data() + m);
  fit.residual = kernels::max_abs_residual(values, coords, fit.coefficients);
  return fit;
}

}  // namespace tangentia::nonsmooth
