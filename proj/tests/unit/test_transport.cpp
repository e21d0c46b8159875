#include <doctest.h>

#include <cmath>

#include "agm/lp.hpp"
#include "agm/transport.hpp"
#include "../support.hpp"

using namespace agm;

namespace {

Vector random_simplex(int k, Rng& rng, double zero_prob = 0.0) {
  Vector v(k);
  for (int a = 0; a < k; ++a) v(a) = rng.uniform() < zero_prob ? 0.0 : rng.uniform(0.05, 1.0);
  if (v.sum() == 0.0) v(0) = 1.0;
  return v / v.sum();
}

double lp_optimum(const Matrix& B, const Vector& rows, const Vector& cols) {
  const int m = static_cast<int>(B.rows()), n = static_cast<int>(B.cols());
  LpProblem lp;
  lp.c.resize(m * n);
  lp.a_eq = Matrix::Zero(m + n, m * n);
  lp.b_eq.resize(m + n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < n; ++b) {
      lp.c(a * n + b) = B(a, b);
      lp.a_eq(a, a * n + b) = 1;
      lp.a_eq(m + b, a * n + b) = 1;
    }
  lp.b_eq << rows, cols;
  return solve_lp(lp).objective;
}

double marginal_error(const Matrix& Q, const Vector& rows, const Vector& cols) {
  return std::max((Q.rowwise().sum() - rows).cwiseAbs().maxCoeff(),
                  (Q.colwise().sum().transpose() - cols).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("zero payoff gives the independent coupling") {
  for (int k = 2; k <= 5; ++k) {
    const Vector u = Vector::Constant(k, 1.0 / k);
    const Matrix Q = recover_pairwise(Matrix::Zero(k, k), u, u);
    CHECK((Q.array() - 1.0 / (k * k)).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("diagonal payoff concentrates on the diagonal") {
  const Vector u = Vector::Constant(2, 0.5);
  const Matrix Q = recover_pairwise(10.0 * Matrix::Identity(2, 2), u, u);
  CHECK(std::abs(Q(0, 0) - 0.5) <= 1e-3);
  CHECK(std::abs(Q(1, 1) - 0.5) <= 1e-3);
  CHECK(std::abs(Q(0, 1)) <= 1e-3);
}

TEST_CASE("one-hot child marginal fixes the coupling") {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const int k = 3;
    Matrix B(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) B(a, b) = rng.uniform(-1, 1);
    const Vector child = Vector::Unit(k, t % k);
    const Vector parent = random_simplex(k, rng);
    for (bool exact : {false, true}) {
      TransportConfig cfg;
      cfg.exact = exact;
      const Matrix Q = recover_pairwise(B, child, parent, cfg);
      CHECK((Q.col(t % k) - parent).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(Q.sum() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("marginals are exact and the objective is near optimal") {
  for (int s = 0; s < 100; ++s) {
    Rng rng(50 + s);
    const int k = 2 + s % 5;
    Matrix B(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) B(a, b) = rng.uniform(-3, 3);
    const Vector rc = random_simplex(k, rng, 0.2), rp = random_simplex(k, rng, 0.2);
    const double opt = lp_optimum(B, rp, rc);
    const Matrix Q = recover_pairwise(B, rc, rp);
    CHECK(marginal_error(Q, rp, rc) <= 1e-10);
    CHECK(Q.minCoeff() >= 0.0);
    const double eps = 1e-2 * B.cwiseAbs().maxCoeff();
    const double value = (Q.array() * B.array()).sum();
    CHECK(value >= opt - eps * std::log(k * k));
    CHECK(value <= opt + 1e-9);
    // Never worse than the independent coupling by more than the entropy slack.
    CHECK(value >= (rp * rc.transpose()).cwiseProduct(B).sum() - eps * std::log(k * k));

    const Matrix X = exact_transport(B, rc, rp);
    CHECK(marginal_error(X, rp, rc) <= 1e-12);
    CHECK((X.array() * B.array()).sum() == doctest::Approx(opt).epsilon(1e-10));
  }
}

TEST_CASE("explicit epsilon and rectangular plans") {
  Rng rng(9);
  Matrix B(3, 4);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 4; ++b) B(a, b) = rng.uniform(-1, 1);
  const Vector rows = random_simplex(3, rng), cols = random_simplex(4, rng);
  const Matrix loose = sinkhorn(B, rows, cols, 1.0, 10000, 1e-12);
  const Matrix tight = sinkhorn(B, rows, cols, 0.01, 10000, 1e-9);
  CHECK(marginal_error(round_to_marginals(loose, rows, cols), rows, cols) <= 1e-12);
  // Larger eps means a blurrier, higher-entropy plan with lower payoff.
  CHECK((loose.array() * B.array()).sum() < (tight.array() * B.array()).sum());
}

TEST_CASE("rounding repairs an arbitrary nonnegative plan") {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    Matrix F(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) F(a, b) = rng.uniform(0, 0.3);
    const Vector rows = random_simplex(3, rng), cols = random_simplex(3, rng);
    const Matrix G = round_to_marginals(F, rows, cols);
    CHECK(marginal_error(G, rows, cols) <= 1e-15);
    CHECK(G.minCoeff() >= 0.0);
  }
}

TEST_CASE("errors") {
  const Vector u = Vector::Constant(2, 0.5);
  CHECK_THROWS_AS(recover_pairwise(Matrix::Zero(2, 2), u, Vector::Constant(2, 0.6)), MarginalError);
  CHECK_THROWS_AS(recover_pairwise(Matrix::Zero(3, 2), u, u), MarginalError);
  CHECK_THROWS_AS(recover_pairwise(Matrix::Zero(2, 2), (Vector(2) << 1.5, -0.5).finished(), u), MarginalError);
}

}
