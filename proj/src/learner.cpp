#include "agm/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace agm {

void step_params(ModelParams& params, const MomentVector& g, double eta) {
  params.theta_v -= eta * g.node_part;
  params.theta_e -= eta * g.edge_part;
}

InstanceEval evaluate_instance(const ModelParams& params, const Instance& inst,
                               const LossSpec& loss, const FeatureTemplate& tpl,
                               const SolverConfig& solver) {
  if (!inst.labeled()) throw DimensionError("training instance without labels");
  const Potentials pots = assemble_potentials(params, inst, tpl);
  const std::vector<LossMatrix> losses = make_losses(loss, inst.size());
  InstanceEval ev;
  ev.inner = solve_inner_game(inst.tree, pots, losses, solver);
  ev.value = ev.inner.value - labeling_score(pots, inst.tree, inst.y);
  ev.adversary_moments = expected_features(inst, ev.inner.marginals.r, ev.inner.marginals.Q, tpl);
  return ev;
}

ObjectiveEval evaluate_agm(const ModelParams& params, const std::vector<Instance>& data,
                           const LossSpec& loss, const FeatureTemplate& tpl, double lambda,
                           const SolverConfig& solver) {
  if (data.empty()) throw DimensionError("objective of an empty dataset");
  ObjectiveEval out;
  out.gradient = MomentVector::zeros(tpl);
  for (const Instance& inst : data) {
    InstanceEval ev = evaluate_instance(params, inst, loss, tpl, solver);
    out.value += ev.value;
    out.gradient += ev.adversary_moments - joint_features(inst, inst.y, tpl);
    out.converged = out.converged && ev.inner.converged;
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  out.value = out.value * inv + 0.5 * lambda * params.squared_norm();
  out.gradient *= inv;
  out.gradient.node_part += lambda * params.theta_v;
  out.gradient.edge_part += lambda * params.theta_e;
  return out;
}

double agm_objective(const ModelParams& params, const std::vector<Instance>& data,
                     const LossSpec& loss, const FeatureTemplate& tpl, double lambda,
                     const SolverConfig& solver) {
  return evaluate_agm(params, data, loss, tpl, lambda, solver).value;
}

ModelParams train_agm(const std::vector<Instance>& data, const LossSpec& loss,
                      const FeatureTemplate& tpl, const TrainConfig& cfg, TrainReport* report) {
  if (data.empty()) throw DimensionError("cannot train on an empty dataset");
  if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  for (const Instance& inst : data) validate_instance(inst, tpl);

  const int N = static_cast<int>(data.size());
  const int per_epoch = (N + cfg.batch_size - 1) / cfg.batch_size;
  const int total = per_epoch * cfg.epochs;
  const int tail = std::clamp(static_cast<int>(std::lround(cfg.tail_fraction * total)), 1, total);
  const int tail_start = total - tail;  // updates t > tail_start are averaged

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};

  ModelParams theta = ModelParams::zeros(tpl);
  ModelParams avg = ModelParams::zeros(tpl);
  int avg_count = 0;
  std::vector<MomentVector> tail_moments(N, MomentVector::zeros(tpl));
  std::vector<int> tail_visits(N, 0);

  Rng rng(cfg.seed);
  std::vector<int> order(N);
  int t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    double epoch_sum = 0.0;
    long epoch_solves = 0, epoch_failures = 0;
    for (int start = 0; start < N; start += cfg.batch_size) {
      const auto t0 = std::chrono::steady_clock::now();
      ++t;
      const int stop = std::min(N, start + cfg.batch_size);
      MomentVector g = MomentVector::zeros(tpl);
      for (int j = start; j < stop; ++j) {
        const int idx = order[j];
        InstanceEval ev = evaluate_instance(theta, data[idx], loss, tpl, cfg.inner);
        epoch_sum += ev.value;
        ++epoch_solves;
        if (!ev.inner.converged) ++epoch_failures;
        if (ev.inner.used_exact_fallback) ++rep.exact_fallbacks;
        if (t > tail_start) {
          const double w = 1.0 / ++tail_visits[idx];
          MomentVector delta = ev.adversary_moments - tail_moments[idx];
          delta *= w;
          tail_moments[idx] += delta;
        }
        g += ev.adversary_moments - joint_features(data[idx], data[idx].y, tpl);
      }
      g *= 1.0 / static_cast<double>(stop - start);
      g.node_part += cfg.lambda * theta.theta_v;
      g.edge_part += cfg.lambda * theta.theta_e;
      step_params(theta, g, cfg.step0 / std::pow(static_cast<double>(t), cfg.step_decay));
      if (t > tail_start) {
        const double w = 1.0 / ++avg_count;
        avg.theta_v += w * (theta.theta_v - avg.theta_v);
        avg.theta_e += w * (theta.theta_e - avg.theta_e);
      }
      rep.update_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    rep.inner_solves += epoch_solves;
    rep.inner_failures += epoch_failures;
    rep.epoch_objective.push_back(epoch_sum / N + 0.5 * cfg.lambda * theta.squared_norm());
    if (2 * epoch_failures > epoch_solves) {
      throw ConvergenceError("inner games failed to converge on " + std::to_string(epoch_failures) +
                             " of " + std::to_string(epoch_solves) + " instances in epoch " +
                             std::to_string(epoch + 1));
    }
    rep.converged = epoch_failures == 0;
  }
  rep.updates = t;

  MomentVector adv = MomentVector::zeros(tpl);
  for (int i = 0; i < N; ++i) {
    if (tail_visits[i] > 0) {
      adv += tail_moments[i];
    } else {
      adv += evaluate_instance(avg, data[i], loss, tpl, cfg.inner).adversary_moments;
    }
  }
  adv *= 1.0 / N;
  const MomentVector diff = adv - empirical_moments(data, tpl);
  rep.node_violation = diff.node_part.cwiseAbs().maxCoeff();
  rep.edge_violation = diff.edge_part.size() ? diff.edge_part.cwiseAbs().maxCoeff() : 0.0;
  return avg;
}

}  // namespace agm
