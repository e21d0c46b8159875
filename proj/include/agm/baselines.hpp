#pragma once

#include <cstdint>
#include <vector>

#include "agm/features.hpp"
#include "agm/loss.hpp"
#include "agm/predictors.hpp"

namespace agm {

/// Exact tree marginals of p(y) proportional to exp(score(y)).
struct CrfMarginals {
  std::vector<Vector> node;  // node[i]: k-vector, slot 0 empty
  std::vector<Matrix> edge;  // edge[i]: (pt(i), i) pairwise; root's is 1 x k
  double log_partition = 0.0;
};

/// Log-domain sum-product (inward then outward pass).
CrfMarginals crf_infer(const TreeGraph& tree, const Potentials& pots);
CrfMarginals crf_infer(const ModelParams& params, const Instance& inst, const FeatureTemplate& tpl);

struct CrfConfig {
  double lambda = 1e-3;
  int max_iters = 5000;
  /// Converged once |gradient|_2 <= grad_tol.
  double grad_tol = 1e-5;
};

struct CrfModel {
  ModelParams params;
  /// Mean log-likelihood minus (lambda/2)|theta|^2 at params.
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Regularized mean log-likelihood and its gradient (empirical minus expected moments minus lambda*theta).
double crf_objective(const ModelParams& params, const std::vector<Instance>& data,
                     const FeatureTemplate& tpl, double lambda, MomentVector* gradient = nullptr);

/// Gradient ascent with Barzilai-Borwein trial steps and Armijo backtracking.
CrfModel train_crf(const std::vector<Instance>& data, const FeatureTemplate& tpl,
                   const CrfConfig& cfg = {});

/// Per node, argmin_a sum_b L_i[a][b] * marginal_i[b], smallest label on ties.
Labeling bayes_decode(const std::vector<Vector>& node_marginals,
                      const std::vector<LossMatrix>& losses);

Prediction crf_bayes_decode(const ModelParams& params, const Instance& inst,
                            const LossSpec& loss, const FeatureTemplate& tpl);

struct SsvmConfig {
  double lambda = 1e-3;
  int epochs = 20;
  double step0 = 0.5;
  double step_decay = 0.5;
  double tail_fraction = 0.25;
  std::uint64_t seed = 1;
};

struct SsvmModel {
  ModelParams params;
  /// Mean hinge over the training set at params.
  double mean_hinge = 0.0;
  int updates = 0;
};

/// argmax_y sum_i L_i[y_i][gold_i] + theta . Phi(x, y).
Labeling loss_augmented_decode(const Potentials& pots, const TreeGraph& tree,
                               const std::vector<LossMatrix>& losses, const Labeling& gold);

/// max_y loss(y, gold) + theta . (Phi(x, y) - Phi(x, gold)); margin rescaled.
double ssvm_hinge(const ModelParams& params, const Instance& inst, const LossSpec& loss,
                  const FeatureTemplate& tpl);

/// Stochastic subgradient on mean hinge plus (lambda/2)|theta|^2, tail averaged.
SsvmModel train_ssvm(const std::vector<Instance>& data, const LossSpec& loss,
                     const FeatureTemplate& tpl, const SsvmConfig& cfg = {});

}  // namespace agm
