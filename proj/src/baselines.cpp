#include "agm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agm/learner.hpp"

namespace agm {

namespace {

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

CrfMarginals crf_infer(const TreeGraph& tree, const Potentials& pots) {
  const int n = tree.size();
  const int k = pots.k();
  std::vector<Vector> inside(n + 1), up(n + 1), outside(n + 1);
  for (NodeId i : tree.topo_order()) {
    inside[i] = pots.b[i];
    for (NodeId c : tree.children(i)) inside[i] += up[c];
    if (tree.parent(i) == kDummyNode) continue;
    up[i] = Vector(k);
    for (int a = 0; a < k; ++a) up[i](a) = log_sum_exp(pots.B[i].row(a).transpose() + inside[i]);
  }
  CrfMarginals out;
  const NodeId root = tree.root();
  out.log_partition = log_sum_exp(inside[root]);
  out.node.assign(n + 1, Vector());
  out.edge.assign(n + 1, Matrix());
  outside[root] = Vector::Zero(k);
  const auto& order = tree.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId i = *it;
    Vector node = (inside[i] + outside[i]).array() - out.log_partition;
    node = node.array().exp();
    out.node[i] = node / node.sum();
    if (i == root) out.edge[i] = out.node[i].transpose();
    for (NodeId c : tree.children(i)) {
      const Vector excl = inside[i] + outside[i] - up[c];
      outside[c] = Vector(k);
      Matrix joint(k, k);
      for (int b = 0; b < k; ++b) {
        outside[c](b) = log_sum_exp(excl + pots.B[c].col(b));
        for (int a = 0; a < k; ++a) {
          joint(a, b) = excl(a) + pots.B[c](a, b) + inside[c](b) - out.log_partition;
        }
      }
      joint = joint.array().exp();
      out.edge[c] = joint / joint.sum();
    }
  }
  return out;
}

CrfMarginals crf_infer(const ModelParams& params, const Instance& inst, const FeatureTemplate& tpl) {
  return crf_infer(inst.tree, assemble_potentials(params, inst, tpl));
}

double crf_objective(const ModelParams& params, const std::vector<Instance>& data,
                     const FeatureTemplate& tpl, double lambda, MomentVector* gradient) {
  if (data.empty()) throw DimensionError("CRF objective of an empty dataset");
  double ll = 0.0;
  MomentVector g = MomentVector::zeros(tpl);
  for (const Instance& inst : data) {
    if (!inst.labeled()) throw DimensionError("CRF training instance without labels");
    const Potentials pots = assemble_potentials(params, inst, tpl);
    const CrfMarginals m = crf_infer(inst.tree, pots);
    ll += labeling_score(pots, inst.tree, inst.y) - m.log_partition;
    if (gradient) g += joint_features(inst, inst.y, tpl) - expected_features(inst, m.node, m.edge, tpl);
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  if (gradient) {
    g *= inv;
    g.node_part -= lambda * params.theta_v;
    g.edge_part -= lambda * params.theta_e;
    *gradient = std::move(g);
  }
  return ll * inv - 0.5 * lambda * params.squared_norm();
}

CrfModel train_crf(const std::vector<Instance>& data, const FeatureTemplate& tpl,
                   const CrfConfig& cfg) {
  for (const Instance& inst : data) validate_instance(inst, tpl);
  CrfModel model;
  model.params = ModelParams::zeros(tpl);
  MomentVector g;
  double f = crf_objective(model.params, data, tpl, cfg.lambda, &g);
  auto norm2 = [](const MomentVector& m) {
    return m.node_part.squaredNorm() + m.edge_part.squaredNorm();
  };
  double alpha = 1.0 / std::max(1.0, std::sqrt(norm2(g)));
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double gn2 = norm2(g);
    model.grad_norm = std::sqrt(gn2);
    model.iterations = it;
    if (model.grad_norm <= cfg.grad_tol) {
      model.converged = true;
      break;
    }
    ModelParams trial;
    MomentVector g_new;
    double f_new = f;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      trial = model.params;
      step_params(trial, g, -alpha);
      f_new = crf_objective(trial, data, tpl, cfg.lambda, &g_new);
      if (f_new >= f + 1e-4 * alpha * gn2) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    // Barzilai-Borwein length for the next trial: s's / (-s'y).
    const double ss = alpha * alpha * gn2;
    const double sy = alpha * (g.node_part.dot(g_new.node_part - g.node_part) +
                               g.edge_part.dot(g_new.edge_part - g.edge_part));
    model.params = std::move(trial);
    g = std::move(g_new);
    f = f_new;
    alpha = sy < 0.0 ? std::clamp(ss / -sy, 1e-10, 1e10) : 1.0;
  }
  model.grad_norm = std::sqrt(norm2(g));
  model.converged = model.grad_norm <= cfg.grad_tol;
  model.objective = f;
  return model;
}

Labeling bayes_decode(const std::vector<Vector>& node_marginals,
                      const std::vector<LossMatrix>& losses) {
  Labeling out;
  for (std::size_t i = 1; i < node_marginals.size(); ++i) {
    const Vector risk = losses[i].matrix() * node_marginals[i];
    const double tie = 1e-12 * std::max(1.0, risk.cwiseAbs().maxCoeff());
    int best = 0;
    for (int a = 1; a < risk.size(); ++a)
      if (risk(a) < risk(best) - tie) best = a;
    out.push_back(best + 1);
  }
  return out;
}

Prediction crf_bayes_decode(const ModelParams& params, const Instance& inst,
                            const LossSpec& loss, const FeatureTemplate& tpl) {
  const CrfMarginals m = crf_infer(params, inst, tpl);
  Prediction out;
  out.labels = bayes_decode(m.node, make_losses(loss, inst.size()));
  out.distributions = m.node;
  out.score = m.log_partition;
  return out;
}

Labeling loss_augmented_decode(const Potentials& pots, const TreeGraph& tree,
                               const std::vector<LossMatrix>& losses, const Labeling& gold) {
  Potentials aug = pots;
  for (NodeId i = 1; i <= tree.size(); ++i) aug.b[i] += losses[i].matrix().col(gold[i - 1] - 1);
  return map_decode(tree, aug).labels;
}

double ssvm_hinge(const ModelParams& params, const Instance& inst, const LossSpec& loss,
                  const FeatureTemplate& tpl) {
  const Potentials pots = assemble_potentials(params, inst, tpl);
  const std::vector<LossMatrix> losses = make_losses(loss, inst.size());
  const Labeling y = loss_augmented_decode(pots, inst.tree, losses, inst.y);
  return total_loss(losses, y, inst.y) + labeling_score(pots, inst.tree, y) -
         labeling_score(pots, inst.tree, inst.y);
}

SsvmModel train_ssvm(const std::vector<Instance>& data, const LossSpec& loss,
                     const FeatureTemplate& tpl, const SsvmConfig& cfg) {
  if (data.empty()) throw DimensionError("cannot train on an empty dataset");
  for (const Instance& inst : data) {
    validate_instance(inst, tpl);
    if (!inst.labeled()) throw DimensionError("SSVM training instance without labels");
  }
  const int N = static_cast<int>(data.size());
  const int total = N * std::max(1, cfg.epochs);
  const int tail = std::clamp(static_cast<int>(std::lround(cfg.tail_fraction * total)), 1, total);
  ModelParams theta = ModelParams::zeros(tpl);
  ModelParams avg = ModelParams::zeros(tpl);
  int avg_count = 0;
  Rng rng(cfg.seed);
  std::vector<int> order(N);
  int t = 0;
  for (int epoch = 0; epoch < std::max(1, cfg.epochs); ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    for (int idx : order) {
      ++t;
      const Instance& inst = data[idx];
      const Potentials pots = assemble_potentials(theta, inst, tpl);
      const std::vector<LossMatrix> losses = make_losses(loss, inst.size());
      const Labeling y = loss_augmented_decode(pots, inst.tree, losses, inst.y);
      MomentVector g = joint_features(inst, y, tpl) - joint_features(inst, inst.y, tpl);
      g.node_part += cfg.lambda * theta.theta_v;
      g.edge_part += cfg.lambda * theta.theta_e;
      step_params(theta, g, cfg.step0 / std::pow(static_cast<double>(t), cfg.step_decay));
      if (t > total - tail) {
        const double w = 1.0 / ++avg_count;
        avg.theta_v += w * (theta.theta_v - avg.theta_v);
        avg.theta_e += w * (theta.theta_e - avg.theta_e);
      }
    }
  }
  SsvmModel model;
  model.params = avg;
  model.updates = t;
  for (const Instance& inst : data) model.mean_hinge += ssvm_hinge(avg, inst, loss, tpl);
  model.mean_hinge /= N;
  return model;
}

}  // namespace agm
