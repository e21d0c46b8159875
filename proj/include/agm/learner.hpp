#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "agm/dual_decomposition.hpp"
#include "agm/features.hpp"
#include "agm/loss.hpp"

namespace agm {

/// Raised when more than half of an epoch's inner games fail to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double lambda = 1e-3;
  int epochs = 20;
  int batch_size = 1;
  /// eta_t = step0 / t^step_decay for update t = 1, 2, ...
  double step0 = 0.5;
  double step_decay = 0.5;
  /// Fraction of final updates whose iterates are averaged into the result.
  double tail_fraction = 0.25;
  SolverConfig inner;
  std::uint64_t seed = 1;
};

struct TrainReport {
  /// Running mean of per-instance objective terms seen in each epoch, plus
  /// the regularizer at the epoch's end.
  std::vector<double> epoch_objective;
  /// |adversary moments - empirical moments|_inf, node and edge parts. The
  /// adversary moments are averaged over the tail updates.
  double node_violation = 0.0;
  double edge_violation = 0.0;
  /// All inner games of the final epoch certified their gap.
  bool converged = false;
  long inner_solves = 0;
  long inner_failures = 0;
  long exact_fallbacks = 0;
  int updates = 0;
  /// Wall-clock seconds per parameter update.
  std::vector<double> update_seconds;
};

struct ObjectiveEval {
  double value = 0.0;
  /// Subgradient: mean over instances of E_adversary[Phi] - Phi(gold), plus lambda * theta.
  MomentVector gradient;
  bool converged = true;
};

/// Per-instance term: inner saddle value minus theta . Phi(x, y_gold), and the
/// adversary's expected features.
struct InstanceEval {
  double value = 0.0;
  MomentVector adversary_moments;
  InnerSolution inner;
};

InstanceEval evaluate_instance(const ModelParams& params, const Instance& inst,
                               const LossSpec& loss, const FeatureTemplate& tpl,
                               const SolverConfig& solver);

/// Sample mean of the per-instance terms plus (lambda/2)|theta|^2, with its subgradient.
ObjectiveEval evaluate_agm(const ModelParams& params, const std::vector<Instance>& data,
                           const LossSpec& loss, const FeatureTemplate& tpl, double lambda,
                           const SolverConfig& solver);

double agm_objective(const ModelParams& params, const std::vector<Instance>& data,
                     const LossSpec& loss, const FeatureTemplate& tpl, double lambda,
                     const SolverConfig& solver = {});

/// Stochastic subgradient descent on the outer objective over shuffled
/// minibatches. Returns the average of the iterates over the final
/// tail_fraction of updates.
ModelParams train_agm(const std::vector<Instance>& data, const LossSpec& loss,
                      const FeatureTemplate& tpl, const TrainConfig& cfg,
                      TrainReport* report = nullptr);

/// theta -= eta * g, applied to both parts.
void step_params(ModelParams& params, const MomentVector& g, double eta);

}  // namespace agm
