#include <doctest.h>

#include "agm/joint_game.hpp"
#include "agm/predictors.hpp"
#include "../support.hpp"

using namespace agm;
using namespace agm::testing;

TEST_SUITE("predictors") {

TEST_CASE("simplex projection examples") {
  Vector v(3);
  v << 2, 0, 0;
  CHECK(project_simplex(v).isApprox(Vector::Unit(3, 0)));
  const Vector u = Vector::Constant(4, 0.25);
  CHECK((project_simplex(u) - u).cwiseAbs().maxCoeff() <= 1e-15);
  Vector w(2);
  w << 1.2, 0.3;
  const Vector pw = project_simplex(w);
  CHECK(pw(0) == doctest::Approx(0.95));
  CHECK(pw(1) == doctest::Approx(0.05));
}

TEST_CASE("simplex projection satisfies its optimality conditions") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const int k = 1 + static_cast<int>(rng.below(6));
    Vector v(k);
    for (int a = 0; a < k; ++a) v(a) = rng.uniform(-3, 3);
    const Vector p = project_simplex(v);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.minCoeff() >= 0.0);
    // v - p is constant on the support and no larger off it.
    double tau = 0;
    bool set = false;
    for (int a = 0; a < k; ++a)
      if (p(a) > 0) {
        if (!set) tau = v(a) - p(a), set = true;
        CHECK(v(a) - p(a) == doctest::Approx(tau).epsilon(1e-10));
      }
    for (int a = 0; a < k; ++a)
      if (p(a) == 0) CHECK(v(a) <= tau + 1e-10);
    CHECK((project_simplex(p) - p).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("MAP decoding follows strong diagonal couplings") {
  const TreeGraph tree = make_chain(2);
  Potentials pots = zero_potentials(tree, 2);
  pots.B[2] = 5.0 * Matrix::Identity(2, 2);
  pots.b[1] << 0.1, 0.0;
  const Prediction pred = map_decode(tree, pots);
  CHECK(pred.labels == Labeling{1, 1});
  CHECK(pred.score == doctest::Approx(5.1));
}

TEST_CASE("MAP decoding matches brute force") {
  for (int s = 0; s < 60; ++s) {
    Rng rng(1000 + s);
    const int n = 1 + s % 5, k = 2 + s % 3;
    const TreeGraph tree = s % 2 ? make_star(n) : make_chain(n);
    const Potentials pots = random_potentials(tree, k, rng);
    const Prediction pred = map_decode(tree, pots);
    const Labeling best = brute_map(tree, pots, k);
    CHECK(pred.score == doctest::Approx(score_of(tree, pots, best)).epsilon(1e-12));
    CHECK(score_of(tree, pots, pred.labels) == doctest::Approx(pred.score).epsilon(1e-12));
  }
}

TEST_CASE("MAP ties resolve to the smallest label") {
  const TreeGraph tree = make_chain(3);
  const Prediction pred = map_decode(tree, zero_potentials(tree, 3));
  CHECK(pred.labels == Labeling{1, 1, 1});
}

TEST_CASE("probabilistic predictor on a single node matches the node game") {
  Vector b(3);
  b << 0.4, -0.2, 0.1;
  for (LossKind kind : all_loss_kinds()) {
    const TreeGraph tree = make_chain(1);
    Potentials pots = zero_potentials(tree, 3);
    pots.b[1] = b;
    const auto losses = make_losses(spec_of(kind, 3), 1);
    const Prediction pred = probabilistic_game(tree, pots, losses);
    CHECK(pred.converged);
    CHECK(pred.gap <= 1e-3);
    const double v = solve_node_game(b, losses[1]).value;
    CHECK(pred.score >= v - 1e-9);
    CHECK(pred.score - pred.gap <= v + 1e-9);
    CHECK(pred.distributions[1].sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("probabilistic predictor certifies the saddle value of small trees") {
  for (int s = 0; s < 12; ++s) {
    Rng rng(2000 + s);
    const int n = 2 + s % 2, k = 2 + s / 2 % 2;
    const TreeGraph tree = s % 3 ? make_chain(n) : make_star(n);
    const Potentials pots = random_potentials(tree, k, rng);
    const auto losses = make_losses(spec_of(all_loss_kinds()[s % 4], k, s), n);
    const Prediction pred = probabilistic_game(tree, pots, losses);
    CHECK(pred.converged);
    CHECK(pred.gap <= 1e-3);
    const double oracle = exhaustive_joint_game(tree, pots, losses).game_value;
    // The certificate brackets the saddle value.
    CHECK(pred.score >= oracle - 1e-8);
    CHECK(pred.score - pred.gap <= oracle + 1e-8);
    for (int i = 1; i <= n; ++i) {
      CHECK(pred.distributions[i].sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(pred.distributions[i].minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("mode labels take the smallest maximizer") {
  std::vector<Vector> d(3);
  d[1] = Vector(3);
  d[1] << 0.2, 0.4, 0.4;
  d[2] = Vector(3);
  d[2] << 0.5, 0.2, 0.3;
  CHECK(mode_labels(d) == Labeling{2, 1});
}

}
