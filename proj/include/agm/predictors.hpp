#pragma once

#include <vector>

#include "agm/features.hpp"
#include "agm/loss.hpp"

namespace agm {

struct Prediction {
  /// MAP: one label per node (1-based values, node i at index i-1).
  Labeling labels;
  /// Probabilistic: p[i] for node i, slot 0 empty.
  std::vector<Vector> distributions;
  /// MAP: potential of the labeling. Probabilistic: max over the adversary
  /// at the returned p (upper end of the certified gap).
  double score = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// Euclidean projection onto the probability simplex (sort and threshold).
Vector project_simplex(const Vector& v);

/// Exact argmax over labelings of sum_i b_i[y_i] + sum_i B_i[y_pt(i)][y_i] by
/// leaves-to-root max-product with backpointers. Each node takes the smallest
/// maximizing label given its parent's label.
Prediction map_decode(const TreeGraph& tree, const Potentials& pots);

Prediction predict_map(const ModelParams& params, const Instance& inst,
                       const FeatureTemplate& tpl);

struct ProbabilisticConfig {
  /// Stop once (max_Q f(p_avg, Q)) - (min_p f(p, Q_avg)) <= tol.
  double tol = 1e-3;
  int max_iters = 20000;
  /// eta_t = step0 / (max loss entry * sqrt(t)). Larger steps overshoot
  /// the averaged iterate badly; 0.03 to 0.1 certified fastest on small trees.
  double step0 = 0.05;
  /// The certificate is evaluated every this many iterations.
  int check_every = 10;
};

/// min over predictor node marginals p of the max over adversary marginals of
/// sum_i p_i' L_i r_i + sum_i b_i' r_i + sum_edges <B_i, Q_i>, by projected
/// subgradient on p. The inner max is a MAP problem with node potentials
/// b_i + L_i' p_i. p is averaged over the most recent half of the iterates.
Prediction probabilistic_game(const TreeGraph& tree, const Potentials& pots,
                              const std::vector<LossMatrix>& losses,
                              const ProbabilisticConfig& cfg = {});

Prediction predict_probabilistic(const ModelParams& params, const Instance& inst,
                                 const std::vector<LossMatrix>& losses,
                                 const FeatureTemplate& tpl,
                                 const ProbabilisticConfig& cfg = {});

/// Most probable label of each p_i, smallest on ties.
Labeling mode_labels(const std::vector<Vector>& distributions);

}  // namespace agm
