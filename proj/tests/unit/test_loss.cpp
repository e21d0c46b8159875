#include <doctest.h>

#include "agm/loss.hpp"

using namespace agm;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  int a = 0;
  for (const auto& r : rows) {
    int b = 0;
    for (double v : r) m(a, b++) = v;
    ++a;
  }
  return m;
}

LossSpec spec(LossKind kind, int k) {
  LossSpec s;
  s.kind = kind;
  s.k = k;
  return s;
}

}  // namespace

TEST_SUITE("loss") {

TEST_CASE("built-in matrices") {
  CHECK(make_loss(spec(LossKind::kZeroOne, 2), 1, 1).matrix() == mat({{0, 1}, {1, 0}}));
  CHECK(make_loss(spec(LossKind::kAbsolute, 3), 1, 1).matrix() == mat({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}));
  CHECK(make_loss(spec(LossKind::kSquared, 3), 1, 1).matrix() == mat({{0, 1, 4}, {1, 0, 1}, {4, 1, 0}}));
}

TEST_CASE("explicit node weights scale the base matrix") {
  LossSpec s = spec(LossKind::kZeroOne, 2);
  s.weighting = NodeWeighting::kExplicit;
  s.node_weights = {1, 2, 3};
  CHECK(make_loss(s, 3, 3).matrix() == mat({{0, 3}, {3, 0}}));
  s.node_weights = {1, 0, 3};
  CHECK_THROWS_AS(make_loss(s, 2, 3), LossError);
}

TEST_CASE("position weights average to one") {
  LossSpec s = spec(LossKind::kAbsolute, 3);
  s.weighting = NodeWeighting::kPosition;
  for (int n = 1; n <= 9; ++n) {
    double total = 0.0;
    for (int i = 1; i <= n; ++i) {
      const LossMatrix L = make_loss(s, i, n);
      CHECK(L(1, 3) == doctest::Approx(2.0 * 2.0 * i / (n + 1.0)));
      total += L(1, 2);
    }
    CHECK(total / n == doctest::Approx(1.0));
  }
}

TEST_CASE("evaluate_loss averages over nodes") {
  CHECK(evaluate_loss(spec(LossKind::kZeroOne, 2), {1, 2}, {1, 2}) == 0.0);
  CHECK(evaluate_loss(spec(LossKind::kZeroOne, 2), {1, 2}, {2, 2}) == 0.5);
  CHECK(evaluate_loss(spec(LossKind::kAbsolute, 3), {1, 3}, {3, 3}) == 1.0);
  CHECK_THROWS_AS(evaluate_loss(spec(LossKind::kZeroOne, 2), {1}, {1, 2}), LossError);
  CHECK_THROWS_AS(evaluate_loss(spec(LossKind::kZeroOne, 2), {1, 3}, {1, 2}), LossError);
}

TEST_CASE("built-in metrics are symmetric; squared is absolute squared") {
  for (int k = 2; k <= 7; ++k) {
    for (LossKind kind : {LossKind::kZeroOne, LossKind::kAbsolute, LossKind::kSquared}) {
      const Matrix m = base_loss(kind, k);
      CHECK(m == m.transpose());
      CHECK(m.diagonal().isZero());
      CHECK(m.minCoeff() >= 0.0);
    }
    CHECK(base_loss(LossKind::kSquared, k) == base_loss(LossKind::kAbsolute, k).cwiseAbs2());
  }
}

TEST_CASE("evaluate_loss is invariant to permuting nodes jointly") {
  Rng rng(3);
  const LossSpec s = spec(LossKind::kSquared, 4);
  for (int t = 0; t < 50; ++t) {
    Labeling p(7), y(7);
    for (int i = 0; i < 7; ++i) {
      p[i] = 1 + static_cast<int>(rng.below(4));
      y[i] = 1 + static_cast<int>(rng.below(4));
    }
    std::vector<int> perm{0, 1, 2, 3, 4, 5, 6};
    rng.shuffle(perm);
    Labeling pp(7), yy(7);
    for (int i = 0; i < 7; ++i) {
      pp[i] = p[perm[i]];
      yy[i] = y[perm[i]];
    }
    CHECK(evaluate_loss(s, pp, yy) == doctest::Approx(evaluate_loss(s, p, y)).epsilon(1e-15));
  }
}

TEST_CASE("loss matrix validation") {
  CHECK_THROWS_AS(LossMatrix(mat({{0, -1}, {1, 0}})), LossError);
  CHECK_THROWS_AS(LossMatrix(Matrix::Zero(2, 3)), LossError);
  CHECK_THROWS_AS(LossMatrix(mat({{0, NAN}, {1, 0}})), LossError);
  LossSpec s = spec(LossKind::kCostSensitive, 2);
  CHECK_THROWS_AS(make_loss(s, 1, 1), LossError);
  s.custom = mat({{1, 1}, {1, 0}});
  CHECK_THROWS_AS(make_loss(s, 1, 1), LossError);
  CHECK_THROWS_AS(parse_loss_kind("hamming"), LossError);
}

TEST_CASE("zero-one detection") {
  CHECK(make_loss(spec(LossKind::kZeroOne, 4), 1, 1).is_zero_one());
  CHECK_FALSE(make_loss(spec(LossKind::kAbsolute, 3), 1, 1).is_zero_one());
  CHECK(make_loss(spec(LossKind::kAbsolute, 2), 1, 1).is_zero_one());
}

TEST_CASE("random ordinal cost is an ordinal metric under a permutation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix m = random_ordinal_cost(5, seed);
    CHECK(m == m.transpose());
    CHECK(m.diagonal().isZero());
    CHECK(m.maxCoeff() == 4.0);
    // Each row is a permutation of distances to one position on a line.
    for (int a = 0; a < 5; ++a) CHECK((m.row(a).array() == 0.0).count() == 1);
  }
  CHECK(random_ordinal_cost(6, 9) == random_ordinal_cost(6, 9));
}

TEST_CASE("loss spec text round-trips through canonical form") {
  LossSpec s = spec(LossKind::kCostSensitive, 3);
  s.custom = random_ordinal_cost(3, 4);
  s.weighting = NodeWeighting::kExplicit;
  s.node_weights = {0.5, 1.25, 3};
  const LossSpec back = parse_loss_spec(s.canonical(), 3);
  CHECK(back.canonical() == s.canonical());
  CHECK(back.hash() == s.hash());
  CHECK(parse_loss_spec("absolute:weighted", 4).weighting == NodeWeighting::kPosition);
  CHECK(parse_loss_spec("absolute:weighted", 4).name() == "absolute-weighted");
  CHECK(parse_loss_spec("zero_one", 4).hash() != parse_loss_spec("absolute", 4).hash());
  CHECK_THROWS_AS(parse_loss_spec("absolute:heavy", 3), LossError);
}

}
