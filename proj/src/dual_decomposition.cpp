#include "agm/dual_decomposition.hpp"

#include <cmath>
#include <limits>

#include "agm/joint_game.hpp"

namespace agm {

namespace {

int parent_states(const TreeGraph& tree, NodeId i, int k) {
  return tree.parent(i) == kDummyNode ? 1 : k;
}

// A_{pt(i);i} = B + 1 b' - u_i 1' + sum_{c in ch(i)} 1 u_c'.
Matrix node_payoff(const TreeGraph& tree, const Potentials& pots, const std::vector<Vector>& u,
                   NodeId i) {
  Matrix A = pots.B[i];
  A.rowwise() += pots.b[i].transpose();
  if (tree.parent(i) != kDummyNode) A.colwise() -= u[i];
  for (NodeId c : tree.children(i)) A.rowwise() += u[c].transpose();
  return A;
}

}  // namespace

double dual_objective(const TreeGraph& tree, const Potentials& pots,
                      const std::vector<LossMatrix>& losses, const std::vector<Vector>& u,
                      std::vector<Vector>* subgradient, NodeGameMethod method) {
  const int n = tree.size();
  std::vector<NodeGameResult> games(n + 1);
  double total = 0.0;
  for (NodeId i = 1; i <= n; ++i) {
    games[i] = solve_node_game(node_payoff(tree, pots, u, i), losses[i], method);
    total += games[i].value;
  }
  if (subgradient) {
    subgradient->assign(n + 1, Vector());
    for (NodeId i = 1; i <= n; ++i) {
      const NodeId pt = tree.parent(i);
      if (pt == kDummyNode) continue;
      (*subgradient)[i] = games[pt].r - games[i].row_assignment.rowwise().sum();
    }
  }
  return total;
}

double primal_value(const TreeGraph& tree, const Potentials& pots,
                    const std::vector<LossMatrix>& losses, const std::vector<Vector>& r,
                    bool exact, std::vector<Matrix>* couplings) {
  const int n = tree.size();
  double total = 0.0;
  if (couplings) couplings->assign(n + 1, Matrix());
  for (NodeId i = 1; i <= n; ++i) {
    total += (losses[i].matrix() * r[i]).minCoeff() + pots.b[i].dot(r[i]);
    const NodeId pt = tree.parent(i);
    if (pt == kDummyNode) {
      if (couplings) (*couplings)[i] = r[i].transpose();
      continue;
    }
    TransportConfig tc;
    tc.exact = exact;
    tc.epsilon = 1e-4 * std::max(1e-12, pots.B[i].cwiseAbs().maxCoeff());
    Matrix Q = recover_pairwise(pots.B[i], r[i], r[pt], tc);
    total += (Q.array() * pots.B[i].array()).sum();
    if (couplings) (*couplings)[i] = std::move(Q);
  }
  return total;
}

DualResult dual_decomposition(const TreeGraph& tree, const Potentials& pots,
                              const std::vector<LossMatrix>& losses, const SolverConfig& cfg) {
  const int n = tree.size();
  if (pots.size() != n || static_cast<int>(losses.size()) != n + 1) {
    throw std::invalid_argument("dual decomposition: potentials/losses do not match the tree");
  }
  const int k = pots.k();
  const bool exact_bound = k <= cfg.exact_bound_max_k;

  DualResult out;
  DualState& st = out.state;
  st.u.assign(n + 1, Vector());
  for (NodeId i = 1; i <= n; ++i)
    if (tree.parent(i) != kDummyNode) st.u[i] = Vector::Zero(parent_states(tree, i, k));
  st.r_avg.assign(n + 1, Vector());
  for (NodeId i = 1; i <= n; ++i) st.r_avg[i] = Vector::Zero(k);
  st.best_dual = std::numeric_limits<double>::infinity();
  st.best_primal = -std::numeric_limits<double>::infinity();

  std::vector<NodeGameResult> games(n + 1);
  std::vector<Vector> best_r, best_p;
  const int max_iters = std::max(1, cfg.max_iters);
  int avg_count = 0;
  std::vector<Vector> r_erg(n + 1);
  for (NodeId i = 1; i <= n; ++i) r_erg[i] = Vector::Zero(k);
  double erg_weight = 0.0, last_eta = 1.0;
  double delta = -1.0;
  int stall = 0;
  // Optimal multipliers are bounded by the payoff scale; cap each move there.
  double scale = 1.0;
  for (NodeId i = 1; i <= n; ++i) {
    scale = std::max(scale, pots.b[i].cwiseAbs().maxCoeff());
    scale = std::max(scale, pots.B[i].cwiseAbs().maxCoeff());
    scale = std::max(scale, losses[i].matrix().maxCoeff());
  }
  const double max_move = cfg.step0 * scale;

  auto consider_primal = [&](const std::vector<Vector>& r) {
    const double v = primal_value(tree, pots, losses, r, exact_bound);
    if (v > st.best_primal) {
      st.best_primal = v;
      best_r = r;
    }
  };

  for (int t = 1; t <= max_iters; ++t) {
    double D = 0.0;
    for (NodeId i = 1; i <= n; ++i) {
      games[i] = solve_node_game(node_payoff(tree, pots, st.u, i), losses[i], cfg.node_method);
      D += games[i].value;
    }
    st.iterations = t;
    st.dual_value = D;
    st.dual_history.push_back(D);
    if (D < st.best_dual - 1e-3 * std::max(delta, 0.0)) stall = 0; else ++stall;
    if (D < st.best_dual) {
      st.best_dual = D;
      best_p.assign(n + 1, Vector());
      for (NodeId i = 1; i <= n; ++i) best_p[i] = games[i].p;
    }
    st.best_dual_history.push_back(st.best_dual);

    // Average over the most recent half of the iterates: restart at powers of two.
    if ((t & (t - 1)) == 0) avg_count = 0;
    ++avg_count;
    const double w = 1.0 / avg_count;
    for (NodeId i = 1; i <= n; ++i) st.r_avg[i] += w * (games[i].r - st.r_avg[i]);
    erg_weight += last_eta;
    for (NodeId i = 1; i <= n; ++i) r_erg[i] += (last_eta / erg_weight) * (games[i].r - r_erg[i]);

    std::vector<Vector> g(n + 1);
    double g_norm2 = 0.0;
    for (NodeId i = 1; i <= n; ++i) {
      const NodeId pt = tree.parent(i);
      if (pt == kDummyNode) continue;
      g[i] = games[pt].r - games[i].row_assignment.rowwise().sum();
      g_norm2 += g[i].squaredNorm();
    }

    // Rounding noise in the tie split leaves a tiny residual at consistent points.
    if (g_norm2 <= 1e-24 * n) g_norm2 = 0.0;
    const bool last = t == max_iters;
    if (t == 1 || t % std::max(1, cfg.primal_every) == 0 || last || g_norm2 == 0.0) {
      std::vector<Vector> cur(n + 1);
      for (NodeId i = 1; i <= n; ++i) cur[i] = games[i].r;
      consider_primal(cur);
      consider_primal(st.r_avg);
      consider_primal(r_erg);
      if (st.gap() <= cfg.gap_tol * std::max(1.0, std::abs(st.best_dual))) {
        st.converged = true;
        break;
      }
    }
    if (g_norm2 == 0.0 || last) break;

    double eta;
    if (cfg.step_rule == StepRule::kPolyak) {
      if (delta < 0.0) delta = std::max(st.best_dual - st.best_primal, 1e-9 * scale);
      if (stall >= 10) {
        delta *= 0.5;
        stall = 0;
      }
      delta = std::min(delta, st.best_dual - st.best_primal);
      const double target = st.best_dual - delta;
      eta = cfg.step0 * std::max(D - target, 1e-12) / g_norm2;
    } else {
      eta = cfg.step0 / (std::sqrt(static_cast<double>(t)) * std::sqrt(g_norm2));
    }
    eta = std::min(eta, max_move / std::sqrt(g_norm2));
    for (NodeId i = 1; i <= n; ++i)
      if (g[i].size()) st.u[i] -= eta * g[i];
    last_eta = eta;
  }

  out.r = best_r;
  out.p = best_p;
  out.value = st.best_dual;
  return out;
}

InnerSolution solve_inner_game(const TreeGraph& tree, const Potentials& pots,
                               const std::vector<LossMatrix>& losses, const SolverConfig& cfg) {
  DualResult dd = dual_decomposition(tree, pots, losses, cfg);
  InnerSolution sol;
  sol.value = dd.value;
  sol.converged = dd.state.converged;
  sol.iterations = dd.state.iterations;
  sol.gap = dd.state.gap();
  const int n = tree.size();
  sol.marginals.r = dd.r;
  sol.marginals.p = dd.p;
  const int k = pots.k();
  const long lp_vars = static_cast<long>(n) * (k + 1) + static_cast<long>(n - 1) * k * k;
  if (!sol.converged && lp_vars <= cfg.exact_fallback_max_vars) {
    PolytopeGameResult exact = polytope_game(tree, pots, losses);
    sol.marginals.r = std::move(exact.r);
    sol.value = exact.value;
    sol.gap = 0.0;
    sol.converged = true;
    sol.used_exact_fallback = true;
  }
  sol.marginals.Q.assign(n + 1, Matrix());
  for (NodeId i = 1; i <= n; ++i) {
    const NodeId pt = tree.parent(i);
    if (pt == kDummyNode) {
      sol.marginals.Q[i] = sol.marginals.r[i].transpose();
    } else {
      sol.marginals.Q[i] = recover_pairwise(pots.B[i], sol.marginals.r[i], sol.marginals.r[pt], cfg.transport);
    }
  }
  return sol;
}

}  // namespace agm
