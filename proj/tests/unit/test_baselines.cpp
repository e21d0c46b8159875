#include <doctest.h>

#include <cmath>

#include "agm/baselines.hpp"
#include "../support.hpp"

using namespace agm;
using namespace agm::testing;

TEST_SUITE("baselines") {

TEST_CASE("zero potentials give the uniform distribution") {
  const TreeGraph tree = make_star(4);
  const CrfMarginals m = crf_infer(tree, zero_potentials(tree, 3));
  CHECK(m.log_partition == doctest::Approx(4 * std::log(3.0)).epsilon(1e-12));
  for (int i = 1; i <= 4; ++i) CHECK((m.node[i].array() - 1.0 / 3).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("single node softmax") {
  const TreeGraph tree = make_chain(1);
  Potentials pots = zero_potentials(tree, 2);
  pots.b[1] << std::log(3.0), 0.0;
  const CrfMarginals m = crf_infer(tree, pots);
  CHECK(m.node[1](0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.node[1](1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(m.log_partition == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("sum-product matches enumeration") {
  for (int s = 0; s < 40; ++s) {
    Rng rng(3000 + s);
    const int n = 1 + s % 5, k = 2 + s % 3;
    const TreeGraph tree = s % 2 ? make_chain(n) : make_star(n);
    // Large potentials exercise the log domain.
    const Potentials pots = random_potentials(tree, k, rng, s % 4 == 0 ? 40.0 : 1.0);
    const CrfMarginals m = crf_infer(tree, pots);
    const BruteMarginals b = brute_crf(tree, pots, k);
    CHECK(m.log_partition == doctest::Approx(b.log_partition).epsilon(1e-10));
    for (int i = 1; i <= n; ++i) {
      CHECK((m.node[i] - b.node[i]).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((m.edge[i] - b.edge[i]).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("likelihood gradient matches finite differences") {
  Rng rng(9);
  const TreeGraph tree = make_chain(3);
  std::vector<Instance> data;
  for (int t = 0; t < 5; ++t) data.push_back(random_instance(tree, 3, 2, 1, rng));
  const FeatureTemplate tpl = feature_template(2, 1, 3);
  const ModelParams params = random_params(tpl, rng);
  MomentVector g;
  crf_objective(params, data, tpl, 0.2, &g);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < params.theta_v.size(); ++j) {
    ModelParams up = params, dn = params;
    up.theta_v(j) += h;
    dn.theta_v(j) -= h;
    const double fd = (crf_objective(up, data, tpl, 0.2) - crf_objective(dn, data, tpl, 0.2)) / (2 * h);
    CHECK(fd == doctest::Approx(g.node_part(j)).epsilon(1e-6));
  }
  for (Eigen::Index j = 0; j < params.theta_e.size(); ++j) {
    ModelParams up = params, dn = params;
    up.theta_e(j) += h;
    dn.theta_e(j) -= h;
    const double fd = (crf_objective(up, data, tpl, 0.2) - crf_objective(dn, data, tpl, 0.2)) / (2 * h);
    CHECK(fd == doctest::Approx(g.edge_part(j)).epsilon(1e-6));
  }
}

TEST_CASE("CRF training reaches a stationary point") {
  Rng rng(12);
  const TreeGraph tree = make_chain(4);
  std::vector<Instance> data;
  for (int t = 0; t < 10; ++t) data.push_back(random_instance(tree, 3, 3, 1, rng));
  const FeatureTemplate tpl = feature_template(3, 1, 3);
  CrfConfig cfg;
  cfg.lambda = 1e-2;
  const CrfModel model = train_crf(data, tpl, cfg);
  CHECK(model.converged);
  CHECK(model.grad_norm <= cfg.grad_tol);
  MomentVector g;
  crf_objective(model.params, data, tpl, cfg.lambda, &g);
  CHECK(std::sqrt(g.node_part.squaredNorm() + g.edge_part.squaredNorm()) <= cfg.grad_tol);
  CHECK(model.objective > crf_objective(ModelParams::zeros(tpl), data, tpl, cfg.lambda));
}

TEST_CASE("Bayes decoding minimizes expected loss") {
  std::vector<Vector> m(2);
  m[1] = Vector(3);
  m[1] << 0.4, 0.1, 0.5;
  CHECK(bayes_decode(m, make_losses(spec_of(LossKind::kAbsolute, 3), 1)) == Labeling{2});
  CHECK(bayes_decode(m, make_losses(spec_of(LossKind::kZeroOne, 3), 1)) == Labeling{3});
  m[1] = Vector::Unit(3, 1);
  for (LossKind kind : all_loss_kinds()) CHECK(bayes_decode(m, make_losses(spec_of(kind, 3), 1)) == Labeling{2});
}

TEST_CASE("loss-augmented decoding matches enumeration") {
  for (int s = 0; s < 40; ++s) {
    Rng rng(4000 + s);
    const int n = 1 + s % 4, k = 2 + s % 3;
    const TreeGraph tree = s % 2 ? make_chain(n) : make_star(n);
    const Potentials pots = random_potentials(tree, k, rng);
    const auto losses = make_losses(spec_of(all_loss_kinds()[s % 4], k, s), n);
    Labeling gold;
    for (int i = 0; i < n; ++i) gold.push_back(1 + static_cast<int>(rng.below(k)));
    auto aug = [&](const Labeling& y) { return total_loss(losses, y, gold) + score_of(tree, pots, y); };
    double best = -1e300;
    for (const Labeling& y : all_labelings(n, k)) best = std::max(best, aug(y));
    CHECK(aug(loss_augmented_decode(pots, tree, losses, gold)) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("hinge at zero parameters is the largest loss") {
  const TreeGraph tree = make_chain(3);
  const Instance inst = one_hot_instance(tree, {1, 2, 3});
  const FeatureTemplate tpl = feature_template(3, 0, 3);
  // Absolute loss: worst is 3,3,1 (2 + 1 + 2).
  CHECK(ssvm_hinge(ModelParams::zeros(tpl), inst, spec_of(LossKind::kAbsolute, 3), tpl) == doctest::Approx(5.0));
}

TEST_CASE("SSVM separates separable data") {
  const TreeGraph tree = make_chain(3);
  std::vector<Instance> data{one_hot_instance(tree, {1, 2, 1}), one_hot_instance(tree, {1, 2, 1})};
  const FeatureTemplate tpl = feature_template(3, 0, 2);
  const LossSpec loss = spec_of(LossKind::kZeroOne, 2);
  SsvmConfig cfg;
  cfg.lambda = 1e-4;
  cfg.epochs = 300;
  const SsvmModel model = train_ssvm(data, loss, tpl, cfg);
  CHECK(model.mean_hinge <= 1e-2);
  CHECK(map_decode(tree, assemble_potentials(model.params, data[0], tpl)).labels == Labeling{1, 2, 1});
}

TEST_CASE("heavy regularization keeps SSVM weights small") {
  Rng rng(31);
  const TreeGraph tree = make_chain(3);
  std::vector<Instance> data;
  for (int t = 0; t < 6; ++t) data.push_back(random_instance(tree, 2, 2, 1, rng));
  const FeatureTemplate tpl = feature_template(2, 1, 2);
  SsvmConfig cfg;
  cfg.lambda = 10.0;
  cfg.step0 = 0.05;
  cfg.epochs = 50;
  const SsvmModel heavy = train_ssvm(data, spec_of(LossKind::kZeroOne, 2), tpl, cfg);
  cfg.lambda = 1e-3;
  const SsvmModel light = train_ssvm(data, spec_of(LossKind::kZeroOne, 2), tpl, cfg);
  const auto norm = [](const ModelParams& p) { return std::hypot(p.theta_v.norm(), p.theta_e.norm()); };
  CHECK(norm(heavy.params) < norm(light.params));
}

}
