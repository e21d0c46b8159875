#include "agm/node_game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace agm {

namespace {

void check_inputs(const Vector& a, const LossMatrix& L) {
  if (a.size() != L.k() || a.size() == 0) throw std::invalid_argument("node game: size mismatch");
  if (!a.allFinite()) throw std::invalid_argument("node game: non-finite potential");
}

// Advances `idx` (strictly increasing, values < k) to the next combination in
// lexicographic order. Returns false after the last one.
bool next_combination(std::vector<int>& idx, int k) {
  const int s = static_cast<int>(idx.size());
  int i = s - 1;
  while (i >= 0 && idx[i] == k - s + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

void clamp_to_simplex(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) < 0.0) v(i) = 0.0;
  const double s = v.sum();
  if (s > 0.0) v /= s;
}

double game_value(const Vector& a, const Matrix& L, const Vector& r) {
  return a.dot(r) + (L * r).minCoeff();
}

}  // namespace

NodeGameResult solve_node_game_enumerate(const Vector& a, const LossMatrix& loss) {
  check_inputs(a, loss);
  const int k = static_cast<int>(a.size());
  const Matrix& L = loss.matrix();
  Matrix M = L;
  M.rowwise() += a.transpose();
  const double shift = 1.0 - M.minCoeff();
  const Matrix Mp = M.array() + shift;
  const double tol = 1e-9 * (1.0 + Mp.cwiseAbs().maxCoeff());

  for (int s = 1; s <= k; ++s) {
    std::vector<int> cols(s);
    std::iota(cols.begin(), cols.end(), 0);
    do {
      std::vector<int> rows(s);
      std::iota(rows.begin(), rows.end(), 0);
      do {
        Matrix sub(s, s);
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j) sub(i, j) = Mp(rows[i], cols[j]);
        Eigen::FullPivLU<Matrix> lu(sub);
        if (!lu.isInvertible()) continue;
        const Vector x = lu.solve(Vector::Ones(s));
        const Vector y = lu.transpose().solve(Vector::Ones(s));
        const double sx = x.sum();
        const double sy = y.sum();
        if (!(sx > 0.0) || !(sy > 0.0)) continue;
        const double v = 1.0 / sx;
        Vector r = Vector::Zero(k);
        Vector p = Vector::Zero(k);
        bool ok = true;
        for (int j = 0; j < s && ok; ++j) {
          r(cols[j]) = x(j) * v;
          p(rows[j]) = y(j) / sy;
          ok = r(cols[j]) >= -tol && p(rows[j]) >= -tol;
        }
        if (!ok) continue;
        // Adversary's r guarantees at least v against every predictor row,
        // and the predictor's p concedes at most v to every adversary column.
        const Vector row_pay = Mp * r;
        const Vector col_pay = Mp.transpose() * p;
        if (row_pay.minCoeff() < v - tol || col_pay.maxCoeff() > v + tol) continue;
        clamp_to_simplex(r);
        clamp_to_simplex(p);
        NodeGameResult res;
        res.value = game_value(a, L, r);
        res.r = std::move(r);
        res.p = std::move(p);
        return res;
      } while (next_combination(rows, k));
    } while (next_combination(cols, k));
  }
  throw std::runtime_error("node game: support enumeration found no equilibrium");
}

NodeGameResult solve_node_game_zero_one(const Vector& a, double w) {
  const int k = static_cast<int>(a.size());
  if (k == 0 || !a.allFinite() || !(w > 0.0)) throw std::invalid_argument("zero-one node game: bad input");
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i) > a(j); });

  const double tol = 1e-13 * (1.0 + a.cwiseAbs().maxCoeff() + w);
  double prefix = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  int best_s = 1;
  for (int s = 1; s <= k; ++s) {
    prefix += a(order[s - 1]);
    const double v = (prefix + w * (s - 1)) / s;
    if (v > best + tol) {
      best = v;
      best_s = s;
    }
  }
  NodeGameResult res;
  res.r = Vector::Zero(k);
  res.p = Vector::Zero(k);
  for (int j = 0; j < best_s; ++j) {
    res.r(order[j]) = 1.0 / best_s;
    res.p(order[j]) = (a(order[j]) + w - best) / w;
  }
  clamp_to_simplex(res.p);
  res.value = best;
  return res;
}

NodeGameResult solve_node_game(const Vector& a, const LossMatrix& L, NodeGameMethod method) {
  check_inputs(a, L);
  if (method == NodeGameMethod::kAuto && L.k() >= 2 && L.is_zero_one()) {
    return solve_node_game_zero_one(a, L(1, 2));
  }
  return solve_node_game_enumerate(a, L);
}

NodeGameResult solve_node_game(const Matrix& A, const LossMatrix& L, NodeGameMethod method) {
  if (!A.allFinite()) throw std::invalid_argument("node game: non-finite potential");
  const Vector a = A.colwise().maxCoeff().transpose();
  NodeGameResult res = solve_node_game(a, L, method);
  const double tol = 1e-12 * (1.0 + A.cwiseAbs().maxCoeff());
  res.row_assignment = Matrix::Zero(A.rows(), A.cols());
  for (Eigen::Index b = 0; b < A.cols(); ++b) {
    if (res.r(b) == 0.0) continue;
    int ties = 0;
    for (Eigen::Index l = 0; l < A.rows(); ++l) ties += A(l, b) >= a(b) - tol;
    for (Eigen::Index l = 0; l < A.rows(); ++l)
      if (A(l, b) >= a(b) - tol) res.row_assignment(l, b) = res.r(b) / ties;
  }
  return res;
}

}  // namespace agm
