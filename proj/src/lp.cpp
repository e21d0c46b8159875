#include "agm/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace agm {

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotEps = 1e-11;

class Simplex {
 public:
  Simplex(Tableau t, std::vector<int> basis, int n_cols, int max_pivots)
      : t_(std::move(t)), basis_(std::move(basis)), n_cols_(n_cols), max_pivots_(max_pivots) {}

  Tableau& tableau() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int rows() const { return static_cast<int>(basis_.size()); }

  /// Objective row is the last tableau row: entries are negated reduced costs
  /// of a maximization, rhs holds the objective value.
  LpStatus run(const std::vector<char>& allowed) {
    const int m = rows();
    const int obj = m;
    const int rhs = n_cols_;
    int degenerate_run = 0;
    while (pivots_ < max_pivots_) {
      const bool bland = degenerate_run > 50;
      int enter = -1;
      double best = -kPivotEps;
      for (int j = 0; j < n_cols_; ++j) {
        if (!allowed[j]) continue;
        const double d = t_(obj, j);
        if (d < best) {
          enter = j;
          best = d;
          if (bland) break;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotEps) continue;
        const double ratio = t_(i, rhs) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && leave >= 0 && basis_[i] < basis_[leave])) {
          best_ratio = std::min(ratio, best_ratio);
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    return LpStatus::kIterationLimit;
  }

  void pivot(int r, int c) {
    ++pivots_;
    t_.row(r) /= t_(r, c);
    for (int i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

 private:
  Tableau t_;
  std::vector<int> basis_;
  int n_cols_;
  int max_pivots_;
  int pivots_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& p, int max_pivots) {
  const int n = static_cast<int>(p.c.size());
  const int m_ub = static_cast<int>(p.a_ub.rows());
  const int m_eq = static_cast<int>(p.a_eq.rows());
  if ((m_ub && p.a_ub.cols() != n) || (m_eq && p.a_eq.cols() != n) || p.b_ub.size() != m_ub ||
      p.b_eq.size() != m_eq) {
    throw std::invalid_argument("solve_lp: inconsistent dimensions");
  }
  const int m = m_ub + m_eq;

  // Columns: [x (n) | slack per ub row (m_ub) | artificial per row needing one].
  std::vector<int> art_of_row(m, -1);
  int n_art = 0;
  for (int i = 0; i < m_ub; ++i)
    if (p.b_ub(i) < 0) art_of_row[i] = n_art++;
  for (int i = 0; i < m_eq; ++i) art_of_row[m_ub + i] = n_art++;
  const int n_cols = n + m_ub + n_art;
  const int rhs = n_cols;

  Tableau t = Tableau::Zero(m + 1, n_cols + 1);
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    const bool is_ub = i < m_ub;
    double sign = 1.0;
    double b = is_ub ? p.b_ub(i) : p.b_eq(i - m_ub);
    if (b < 0) sign = -1.0;
    for (int j = 0; j < n; ++j) t(i, j) = sign * (is_ub ? p.a_ub(i, j) : p.a_eq(i - m_ub, j));
    if (is_ub) t(i, n + i) = sign;
    t(i, rhs) = sign * b;
    if (art_of_row[i] >= 0) {
      const int col = n + m_ub + art_of_row[i];
      t(i, col) = 1.0;
      basis[i] = col;
    } else {
      basis[i] = n + i;
    }
  }

  LpResult result;
  Simplex sx(std::move(t), std::move(basis), n_cols, max_pivots);
  Tableau& tab = sx.tableau();

  if (n_art > 0) {
    // Phase 1: maximize -sum(artificials).
    for (int j = n + m_ub; j < n_cols; ++j) tab(m, j) = 1.0;
    for (int i = 0; i < m; ++i)
      if (sx.basis()[i] >= n + m_ub) tab.row(m) -= tab.row(i);
    std::vector<char> allowed(n_cols, 1);
    const LpStatus s1 = sx.run(allowed);
    if (s1 == LpStatus::kIterationLimit) {
      result.status = s1;
      return result;
    }
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(i < m_ub ? p.b_ub(i) : p.b_eq(i - m_ub)));
    if (tab(m, rhs) < -1e-9 * scale) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive zero-valued artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (sx.basis()[i] < n + m_ub) continue;
      for (int j = 0; j < n + m_ub; ++j) {
        if (std::abs(tab(i, j)) > 1e-9) {
          sx.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2.
  tab.row(m).setZero();
  for (int j = 0; j < n; ++j) tab(m, j) = -p.c(j);
  for (int i = 0; i < m; ++i) {
    const int bj = sx.basis()[i];
    if (bj < n && p.c(bj) != 0.0) tab.row(m) += p.c(bj) * tab.row(i);
  }
  std::vector<char> allowed(n_cols, 0);
  for (int j = 0; j < n + m_ub; ++j) allowed[j] = 1;
  result.status = sx.run(allowed);
  result.x = Vector::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int bj = sx.basis()[i];
    if (bj < n) result.x(bj) = tab(i, rhs);
  }
  result.objective = p.c.dot(result.x);
  return result;
}

MatrixGameSolution solve_matrix_game_lp(const Matrix& payoff) {
  const int rows = static_cast<int>(payoff.rows());
  const int cols = static_cast<int>(payoff.cols());
  // Shift payoffs to be >= 1 so the game value is positive, then use the
  // classic normalization x = strategy / value.
  const double shift = 1.0 - payoff.minCoeff();
  const Matrix m = payoff.array() + shift;

  MatrixGameSolution sol;
  {
    // Row player: max 1'y  s.t.  M'y <= 1.  Value = 1 / 1'y.
    LpProblem lp;
    lp.c = Vector::Ones(rows);
    lp.a_ub = m.transpose();
    lp.b_ub = Vector::Ones(cols);
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::kOptimal) throw std::runtime_error("matrix game LP failed (rows)");
    const double v = 1.0 / r.objective;
    sol.row_strategy = r.x * v;
    sol.value = v - shift;
  }
  {
    // Column player: min 1'x  s.t.  M x >= 1, written as max -1'x, -M x <= -1.
    LpProblem lp;
    lp.c = -Vector::Ones(cols);
    lp.a_ub = -m;
    lp.b_ub = -Vector::Ones(rows);
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::kOptimal) throw std::runtime_error("matrix game LP failed (cols)");
    const double v = 1.0 / (-r.objective);
    sol.col_strategy = r.x * v;
  }
  return sol;
}

}  // namespace agm
