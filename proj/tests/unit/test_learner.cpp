#include <doctest.h>

#include "agm/learner.hpp"
#include "../support.hpp"

using namespace agm;
using namespace agm::testing;

namespace {

std::vector<Instance> all_pairs_dataset() {
  std::vector<Instance> data;
  for (const Labeling& y : all_labelings(2, 2)) data.push_back(one_hot_instance(make_chain(2), y));
  return data;
}

}  // namespace

TEST_SUITE("learner") {

TEST_CASE("objective at zero parameters is the decoupled game value") {
  const auto data = all_pairs_dataset();
  const FeatureTemplate tpl = feature_template(2, 0, 2);
  const LossSpec loss = spec_of(LossKind::kZeroOne, 2);
  const ModelParams zero = ModelParams::zeros(tpl);
  for (double lambda : {0.0, 1.0}) CHECK(agm_objective(zero, data, loss, tpl, lambda) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("symmetric data has zero subgradient at zero parameters") {
  const auto data = all_pairs_dataset();
  const FeatureTemplate tpl = feature_template(2, 0, 2);
  const ObjectiveEval ev = evaluate_agm(ModelParams::zeros(tpl), data, spec_of(LossKind::kZeroOne, 2), tpl, 0.1, {});
  CHECK(ev.converged);
  CHECK(ev.gradient.linf() <= 1e-9);
}

TEST_CASE("regularizer adds lambda/2 |theta|^2 and lambda theta") {
  Rng rng(5);
  const TreeGraph tree = make_chain(3);
  std::vector<Instance> data;
  for (int t = 0; t < 4; ++t) data.push_back(random_instance(tree, 3, 2, 1, rng));
  const FeatureTemplate tpl = feature_template(2, 1, 3);
  const ModelParams params = random_params(tpl, rng, 0.5);
  const LossSpec loss = spec_of(LossKind::kAbsolute, 3);
  SolverConfig solver;
  solver.transport.exact = true;
  const ObjectiveEval a = evaluate_agm(params, data, loss, tpl, 0.0, solver);
  const ObjectiveEval b = evaluate_agm(params, data, loss, tpl, 0.3, solver);
  const double sq = params.theta_v.squaredNorm() + params.theta_e.squaredNorm();
  CHECK(b.value - a.value == doctest::Approx(0.15 * sq).epsilon(1e-9));
  CHECK((b.gradient.node_part - a.gradient.node_part - 0.3 * params.theta_v).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((b.gradient.edge_part - a.gradient.edge_part - 0.3 * params.theta_e).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("per-instance term is the inner value minus the gold score") {
  Rng rng(8);
  const TreeGraph tree = make_star(3);
  const Instance inst = random_instance(tree, 2, 3, 2, rng);
  const FeatureTemplate tpl = feature_template(3, 2, 2);
  const ModelParams params = random_params(tpl, rng);
  const InstanceEval ev = evaluate_instance(params, inst, spec_of(LossKind::kZeroOne, 2), tpl, {});
  const Potentials pots = assemble_potentials(params, inst, tpl);
  CHECK(ev.value == doctest::Approx(ev.inner.value - score_of(tree, pots, inst.y)).epsilon(1e-12));
}

TEST_CASE("training lowers the objective and is deterministic") {
  Rng rng(21);
  const TreeGraph tree = make_chain(4);
  std::vector<Instance> data;
  for (int t = 0; t < 12; ++t) {
    Instance inst = random_instance(tree, 2, 2, 0, rng, false);
    // Labels follow the sign of the first input.
    for (int i = 1; i <= 4; ++i) inst.y.push_back(inst.x[i](0) > 0 ? 2 : 1);
    data.push_back(inst);
  }
  const FeatureTemplate tpl = feature_template(2, 0, 2);
  const LossSpec loss = spec_of(LossKind::kZeroOne, 2);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.lambda = 1e-3;
  cfg.seed = 4;
  TrainReport rep;
  const ModelParams p1 = train_agm(data, loss, tpl, cfg, &rep);
  const ModelParams p2 = train_agm(data, loss, tpl, cfg);
  CHECK(p1.theta_v == p2.theta_v);
  CHECK(p1.theta_e == p2.theta_e);
  CHECK(rep.epoch_objective.size() == 15);
  CHECK(agm_objective(p1, data, loss, tpl, cfg.lambda) < agm_objective(ModelParams::zeros(tpl), data, loss, tpl, cfg.lambda));
  CHECK(rep.updates == 15 * 12);
  cfg.seed = 5;
  const ModelParams p3 = train_agm(data, loss, tpl, cfg);
  CHECK_FALSE(p3.theta_v == p1.theta_v);
}

TEST_CASE("failing inner games abort training") {
  Rng rng(2);
  const TreeGraph tree = make_chain(5);
  std::vector<Instance> data;
  for (int t = 0; t < 4; ++t) data.push_back(random_instance(tree, 3, 2, 1, rng));
  const FeatureTemplate tpl = feature_template(2, 1, 3);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.inner.max_iters = 1;
  cfg.inner.gap_tol = 0.0;
  cfg.inner.exact_fallback_max_vars = 0;
  CHECK_THROWS_AS(train_agm(data, spec_of(LossKind::kSquared, 3), tpl, cfg), ConvergenceError);
}

TEST_CASE("step_params moves against the gradient") {
  const FeatureTemplate tpl = feature_template(1, 1, 2);
  ModelParams p = ModelParams::zeros(tpl);
  MomentVector g = MomentVector::zeros(tpl);
  g.node_part.setConstant(2.0);
  g.edge_part.setConstant(-1.0);
  step_params(p, g, 0.5);
  CHECK((p.theta_v.array() == -1.0).all());
  CHECK((p.theta_e.array() == 0.5).all());
}

}
