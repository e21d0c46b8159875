#pragma once

#include <optional>

#include "agm/dual_decomposition.hpp"

namespace agm {

/// Largest joint label space the exhaustive game accepts (3^6).
inline constexpr long kMaxJointAssignments = 729;

class TooLargeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct JointGameResult {
  /// max over adversary joints, min over predictor joints, of expected
  /// loss plus adversary potential.
  double game_value = 0.0;
  /// game_value minus the gold labeling's potential when truth is given.
  double value = 0.0;
  MarginalSet marginals;
};

/// Solves the full joint zero-sum game over all k^n assignments by linear
/// programming and returns the implied node/edge marginals of both players.
/// Refuses instances with k^n > kMaxJointAssignments.
JointGameResult exhaustive_joint_game(const TreeGraph& tree, const Potentials& pots,
                                      const std::vector<LossMatrix>& losses,
                                      const EncodedTruth* truth = nullptr);

/// Solves the inner game exactly as one linear program over the tree's local
/// marginal polytope (node marginals r_i, pairwise Q_i, epigraph v_i of each
/// node's best response). Returns only the adversary side: p is left empty.
/// Polynomial in n and k, but dense; for oracles and moderate sizes.
struct PolytopeGameResult {
  double value = 0.0;
  std::vector<Vector> r;
  std::vector<Matrix> Q;
};

PolytopeGameResult polytope_game(const TreeGraph& tree, const Potentials& pots,
                                 const std::vector<LossMatrix>& losses);

/// Calls f(labeling) for every labeling in lexicographic order (1-based labels).
template <typename F>
void for_each_labeling(int n, int k, F&& f) {
  Labeling y(n, 1);
  while (true) {
    f(static_cast<const Labeling&>(y));
    int i = n - 1;
    while (i >= 0 && y[i] == k) y[i--] = 1;
    if (i < 0) return;
    ++y[i];
  }
}

}  // namespace agm
