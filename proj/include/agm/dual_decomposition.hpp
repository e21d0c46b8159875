#pragma once

#include <vector>

#include "agm/features.hpp"
#include "agm/graph.hpp"
#include "agm/loss.hpp"
#include "agm/node_game.hpp"
#include "agm/transport.hpp"

namespace agm {

enum class StepRule {
  kInvSqrt,  // eta_t = step0 / (sqrt(t) * |g|)
  kPolyak,   // eta_t = step0 * (D(u_t) - best lower bound) / |g|^2
};

struct SolverConfig {
  /// Stop once best_dual - best_primal <= gap_tol * max(1, |best_dual|).
  double gap_tol = 1e-4;
  int max_iters = 200;
  double step0 = 1.0;
  StepRule step_rule = StepRule::kPolyak;
  /// Evaluate the primal lower bound every this many iterations.
  int primal_every = 5;
  NodeGameMethod node_method = NodeGameMethod::kAuto;
  /// Used for recovering the pairwise marginals handed to the learner.
  TransportConfig transport;
  /// Label counts up to this use an exact transport LP inside the primal
  /// bound; larger ones use Sinkhorn.
  int exact_bound_max_k = 6;
  /// solve_inner_game only: when the dual loop ends without certifying the
  /// gap and the local-polytope LP has at most this many variables, the
  /// adversary marginals come from that LP instead. 0 disables.
  int exact_fallback_max_vars = 1500;
};

/// Adversary node marginals r, pairwise marginals Q (edge (pt(i), i), root's
/// is the 1 x k row r_root') and predictor node marginals p. Indexed by node.
struct MarginalSet {
  std::vector<Vector> p;
  std::vector<Vector> r;
  std::vector<Matrix> Q;
};

struct DualState {
  std::vector<Vector> u;  // u[i] for non-root i; empty at the root and slot 0
  int iterations = 0;
  double dual_value = 0.0;   // D(u) at the last iterate
  double best_dual = 0.0;    // min over iterates (upper bound on the saddle value)
  double best_primal = 0.0;  // best feasible value found (lower bound)
  std::vector<Vector> r_avg;
  std::vector<double> best_dual_history;
  std::vector<double> dual_history;
  bool converged = false;

  double gap() const { return best_dual - best_primal; }
};

struct DualResult {
  DualState state;
  /// Node marginals of the best primal candidate (index 0 unused).
  std::vector<Vector> r;
  /// Predictor node marginals from the node games at the best dual iterate.
  std::vector<Vector> p;
  /// Saddle value estimate: best dual bound.
  double value = 0.0;
};

/// Projected subgradient descent on the consistency multipliers u of the
/// decomposed inner game, with primal averaging of node marginals.
DualResult dual_decomposition(const TreeGraph& tree, const Potentials& pots,
                              const std::vector<LossMatrix>& losses, const SolverConfig& cfg = {});

/// Decomposed objective D(u) and its subgradient (same layout as u).
double dual_objective(const TreeGraph& tree, const Potentials& pots,
                      const std::vector<LossMatrix>& losses, const std::vector<Vector>& u,
                      std::vector<Vector>* subgradient = nullptr,
                      NodeGameMethod method = NodeGameMethod::kAuto);

/// Value of the inner game when the adversary commits to node marginals r and
/// the best coupling on every edge. Couplings are written to *couplings.
double primal_value(const TreeGraph& tree, const Potentials& pots,
                    const std::vector<LossMatrix>& losses, const std::vector<Vector>& r,
                    bool exact_transport, std::vector<Matrix>* couplings = nullptr);

struct InnerSolution {
  MarginalSet marginals;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  double gap = 0.0;
  bool used_exact_fallback = false;
};

/// dual_decomposition followed by recover_pairwise on every edge, with the
/// exact local-polytope LP as fallback (see exact_fallback_max_vars).
InnerSolution solve_inner_game(const TreeGraph& tree, const Potentials& pots,
                               const std::vector<LossMatrix>& losses, const SolverConfig& cfg = {});

}  // namespace agm
