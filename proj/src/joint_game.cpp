#include "agm/joint_game.hpp"

#include <stdexcept>

#include "agm/lp.hpp"

namespace agm {

JointGameResult exhaustive_joint_game(const TreeGraph& tree, const Potentials& pots,
                                      const std::vector<LossMatrix>& losses,
                                      const EncodedTruth* truth) {
  const int n = tree.size();
  const int k = pots.k();
  long total = 1;
  for (int i = 0; i < n; ++i) {
    total *= k;
    if (total > kMaxJointAssignments) {
      throw TooLargeError("exhaustive joint game refuses k^n > " + std::to_string(kMaxJointAssignments));
    }
  }
  std::vector<Labeling> all;
  all.reserve(total);
  for_each_labeling(n, k, [&](const Labeling& y) { all.push_back(y); });

  const int N = static_cast<int>(all.size());
  Matrix payoff(N, N);
  std::vector<double> score(N);
  for (int c = 0; c < N; ++c) score[c] = labeling_score(pots, tree, all[c]);
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < N; ++c) {
      double loss = 0.0;
      for (int i = 1; i <= n; ++i) loss += losses[i](all[r][i - 1], all[c][i - 1]);
      payoff(r, c) = loss + score[c];
    }
  }
  const MatrixGameSolution sol = solve_matrix_game_lp(payoff);

  JointGameResult res;
  res.game_value = sol.value;
  res.value = sol.value;
  if (truth) {
    double gold = 0.0;
    for (int i = 1; i <= n; ++i) {
      gold += pots.b[i].dot(truth->z[i]);
      if (tree.parent(i) != kDummyNode) gold += (pots.B[i].array() * truth->Z[i].array()).sum();
    }
    res.value -= gold;
  }
  MarginalSet& m = res.marginals;
  m.p.assign(n + 1, Vector());
  m.r.assign(n + 1, Vector());
  m.Q.assign(n + 1, Matrix());
  for (int i = 1; i <= n; ++i) {
    m.p[i] = Vector::Zero(k);
    m.r[i] = Vector::Zero(k);
    m.Q[i] = Matrix::Zero(tree.parent(i) == kDummyNode ? 1 : k, k);
  }
  for (int c = 0; c < N; ++c) {
    const double pr = std::max(0.0, sol.col_strategy(c));
    const double pp = std::max(0.0, sol.row_strategy(c));
    for (int i = 1; i <= n; ++i) {
      const int yi = all[c][i - 1] - 1;
      m.r[i](yi) += pr;
      m.p[i](yi) += pp;
      const NodeId pt = tree.parent(i);
      m.Q[i](pt == kDummyNode ? 0 : all[c][pt - 1] - 1, yi) += pr;
    }
  }
  return res;
}

PolytopeGameResult polytope_game(const TreeGraph& tree, const Potentials& pots,
                                 const std::vector<LossMatrix>& losses) {
  const int n = tree.size();
  const int k = pots.k();
  // Layout: per node [r_i (k) | v_i | Q_i (k*k, column-major, non-root only)].
  std::vector<int> off(n + 2, 0);
  for (NodeId i = 1; i <= n; ++i)
    off[i + 1] = off[i] + k + 1 + (tree.parent(i) == kDummyNode ? 0 : k * k);
  const int nv = off[n + 1];
  const int n_edges = n - 1;
  LpProblem lp;
  lp.c = Vector::Zero(nv);
  lp.a_ub = Matrix::Zero(n * k, nv);
  lp.b_ub = Vector::Zero(n * k);
  lp.a_eq = Matrix::Zero(n + 2 * k * n_edges, nv);
  lp.b_eq = Vector::Zero(lp.a_eq.rows());
  int eq = 0;
  for (NodeId i = 1; i <= n; ++i) {
    const int r0 = off[i], v = off[i] + k, q0 = off[i] + k + 1;
    for (int a = 0; a < k; ++a) lp.c(r0 + a) = pots.b[i](a);
    lp.c(v) = 1.0;
    // Loss is nonnegative, so v_i >= 0 loses nothing.
    for (int j = 0; j < k; ++j) {
      lp.a_ub((i - 1) * k + j, v) = 1.0;
      for (int a = 0; a < k; ++a) lp.a_ub((i - 1) * k + j, r0 + a) = -losses[i].matrix()(j, a);
    }
    for (int a = 0; a < k; ++a) lp.a_eq(eq, r0 + a) = 1.0;
    lp.b_eq(eq++) = 1.0;
    const NodeId pt = tree.parent(i);
    if (pt == kDummyNode) continue;
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) lp.c(q0 + b * k + a) = pots.B[i](a, b);
    }
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) lp.a_eq(eq, q0 + b * k + a) = 1.0;
      lp.a_eq(eq++, off[pt] + a) = -1.0;
    }
    for (int b = 0; b < k; ++b) {
      for (int a = 0; a < k; ++a) lp.a_eq(eq, q0 + b * k + a) = 1.0;
      lp.a_eq(eq++, r0 + b) = -1.0;
    }
  }
  const LpResult sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) throw std::runtime_error("polytope game: LP failed");

  PolytopeGameResult res;
  res.value = sol.objective;
  res.r.assign(n + 1, Vector());
  res.Q.assign(n + 1, Matrix());
  for (NodeId i = 1; i <= n; ++i) {
    res.r[i] = sol.x.segment(off[i], k).cwiseMax(0.0);
    res.r[i] /= res.r[i].sum();
    if (tree.parent(i) == kDummyNode) {
      res.Q[i] = res.r[i].transpose();
    } else {
      res.Q[i] = Eigen::Map<const Matrix>(sol.x.data() + off[i] + k + 1, k, k).cwiseMax(0.0);
    }
  }
  return res;
}

}  // namespace agm
