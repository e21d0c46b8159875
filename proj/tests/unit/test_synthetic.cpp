#include <doctest.h>

#include <cmath>

#include "agm/synthetic.hpp"
#include "../support.hpp"

using namespace agm;
using namespace agm::testing;

namespace {

// P(y_i = b | x) by summing over every hidden sequence.
std::vector<Vector> brute_posteriors(const GeneratorModel& m, const Instance& inst) {
  const int n = inst.size(), k = m.k;
  std::vector<Vector> post(n + 1, Vector::Zero(k));
  double z = 0.0;
  for (const Labeling& h : all_labelings(n, k)) {
    double logp = std::log(m.initial(h[0] - 1));
    for (int i = 1; i < n; ++i) logp += std::log(m.transition(h[i - 1] - 1, h[i] - 1));
    for (int i = 0; i < n; ++i) {
      const Vector diff = inst.x[i + 1] - m.means.row(h[i] - 1).transpose();
      logp -= diff.squaredNorm() / (2 * m.sigma * m.sigma);
    }
    const double w = std::exp(logp);
    z += w;
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < k; ++b)
        post[i + 1](b) += w * (b == h[i] - 1 ? 1.0 - m.noise : m.noise / (k - 1));
  }
  for (int i = 1; i <= n; ++i) post[i] /= z;
  return post;
}

}  // namespace

TEST_SUITE("synthetic") {

TEST_CASE("generated data has the configured shape") {
  GeneratorConfig cfg;
  cfg.instances = 30;
  cfg.min_length = 2;
  cfg.max_length = 5;
  const GeneratedData g = generate_synthetic(cfg);
  CHECK(g.data.instances.size() == 30);
  CHECK(g.data.k == 3);
  CHECK(g.data.d == 4);
  CHECK(g.data.d_e == 0);
  for (const Instance& inst : g.data.instances) {
    CHECK(inst.size() >= 2);
    CHECK(inst.size() <= 5);
    CHECK(inst.labeled());
    for (int i = 2; i <= inst.size(); ++i) CHECK(inst.tree.parent(i) == i - 1);
  }
  CHECK((g.model.transition.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(g.model.initial.sum() == doctest::Approx(1.0));
}

TEST_CASE("generation is deterministic in the seed") {
  GeneratorConfig cfg;
  cfg.instances = 10;
  const GeneratedData a = generate_synthetic(cfg), b = generate_synthetic(cfg);
  cfg.seed = 2;
  const GeneratedData c = generate_synthetic(cfg);
  bool differs = false;
  for (int t = 0; t < 10; ++t) {
    CHECK(a.data.instances[t].y == b.data.instances[t].y);
    CHECK(a.data.instances[t].x[1] == b.data.instances[t].x[1]);
    differs |= a.data.instances[t].x[1] != c.data.instances[t].x[1];
  }
  CHECK(differs);
}

TEST_CASE("noise-free emissions make the Bayes risk vanish") {
  GeneratorConfig cfg;
  cfg.instances = 20;
  cfg.noise = 0.0;
  cfg.sigma = 0.0;
  const GeneratedData g = generate_synthetic(cfg);
  for (LossKind kind : all_loss_kinds())
    CHECK(bayes_risk(g.model, g.data, spec_of(kind, 3)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("posteriors match enumeration over hidden chains") {
  GeneratorConfig cfg;
  cfg.instances = 8;
  cfg.min_length = 1;
  cfg.max_length = 3;
  cfg.sigma = 0.8;
  cfg.noise = 0.2;
  cfg.seed = 9;
  const GeneratedData g = generate_synthetic(cfg);
  for (const Instance& inst : g.data.instances) {
    const auto fast = label_posteriors(g.model, inst);
    const auto slow = brute_posteriors(g.model, inst);
    for (int i = 1; i <= inst.size(); ++i) CHECK((fast[i] - slow[i]).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("generator description round trips through JSON") {
  GeneratorConfig cfg;
  cfg.instances = 3;
  const GeneratedData g = generate_synthetic(cfg);
  const GeneratorModel back = generator_from_json(generator_to_json(cfg, g.model));
  CHECK(back.k == g.model.k);
  CHECK(back.d == g.model.d);
  CHECK(back.sigma == g.model.sigma);
  CHECK(back.noise == g.model.noise);
  CHECK(back.initial == g.model.initial);
  CHECK(back.transition == g.model.transition);
  CHECK(back.means == g.model.means);
  CHECK_THROWS_AS(generator_from_json("{\"model\": {\"k\": 3}}"), DataError);
  CHECK_THROWS_AS(generator_from_json("not json"), DataError);
}

TEST_CASE("bad settings are rejected") {
  GeneratorConfig cfg;
  cfg.k = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  cfg = {};
  cfg.min_length = 5;
  cfg.max_length = 4;
  CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  cfg = {};
  cfg.noise = 1.5;
  CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
}

}
