#include "agm/transport.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "agm/lp.hpp"

namespace agm {

namespace {

std::vector<int> support_of(const Vector& v) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) > 0.0) s.push_back(static_cast<int>(i));
  return s;
}

void check_marginals(const Matrix& B, const Vector& r_child, const Vector& r_parent) {
  if (B.rows() != r_parent.size() || B.cols() != r_child.size()) {
    throw MarginalError("transport: potential shape does not match marginals");
  }
  if (!B.allFinite() || !r_child.allFinite() || !r_parent.allFinite()) {
    throw MarginalError("transport: non-finite input");
  }
  if (r_child.minCoeff() < 0.0 || r_parent.minCoeff() < 0.0) {
    throw MarginalError("transport: negative marginal entry");
  }
  if (std::abs(r_child.sum() - r_parent.sum()) > 1e-8) {
    throw MarginalError("transport: marginals carry different total mass");
  }
}

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// Transportation simplex (maximizing <X, B>) on strictly positive margins:
// north-west corner start, u-v potentials, entering cell with the largest
// reduced profit, ratio test around the basis cycle. Returns false when the
// pivot budget runs out.
bool transport_simplex(const Matrix& B, const Vector& rows, const Vector& cols, Matrix& X) {
  const int m = static_cast<int>(B.rows()), n = static_cast<int>(B.cols());
  struct Cell {
    int i, j;
    double x;
  };
  std::vector<Cell> basis;
  {
    Vector s = rows, d = cols;
    int i = 0, j = 0;
    while (true) {
      const double x = std::min(s(i), d(j));
      basis.push_back({i, j, x});
      s(i) -= x;
      d(j) -= x;
      if (i == m - 1 && j == n - 1) break;
      if (i < m - 1 && (j == n - 1 || s(i) <= d(j))) ++i; else ++j;
    }
  }
  const double tol = 1e-12 * (1.0 + B.cwiseAbs().maxCoeff());
  const int nodes = m + n;  // rows 0..m-1, columns m..m+n-1
  std::vector<double> pot(nodes);
  std::vector<int> via(nodes), queue(nodes);
  std::vector<std::vector<int>> adj(nodes);
  for (int pivot = 0; pivot < 50 * nodes * nodes; ++pivot) {
    for (auto& a : adj) a.clear();
    for (int c = 0; c < static_cast<int>(basis.size()); ++c) {
      adj[basis[c].i].push_back(c);
      adj[m + basis[c].j].push_back(c);
    }
    // Potentials u_i + v_j = B_ij on basic cells; the basis is a spanning tree.
    std::fill(via.begin(), via.end(), -2);
    via[0] = -1;
    pot[0] = 0.0;
    int head = 0, tail = 0;
    queue[tail++] = 0;
    while (head < tail) {
      const int node = queue[head++];
      for (int c : adj[node]) {
        const int other = node < m ? m + basis[c].j : basis[c].i;
        if (via[other] != -2) continue;
        via[other] = c;
        pot[other] = B(basis[c].i, basis[c].j) - pot[node];
        queue[tail++] = other;
      }
    }
    int ei = -1, ej = -1;
    double best = tol;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        const double gain = B(i, j) - pot[i] - pot[m + j];
        if (gain > best) {
          best = gain;
          ei = i;
          ej = j;
        }
      }
    if (ei < 0) {
      X = Matrix::Zero(m, n);
      for (const Cell& c : basis) X(c.i, c.j) = std::max(0.0, c.x);
      return true;
    }
    // Tree path from column ej back to row ei, found by a search rooted at ei.
    std::fill(via.begin(), via.end(), -2);
    via[ei] = -1;
    head = tail = 0;
    queue[tail++] = ei;
    while (head < tail && via[m + ej] == -2) {
      const int node = queue[head++];
      for (int c : adj[node]) {
        const int other = node < m ? m + basis[c].j : basis[c].i;
        if (via[other] != -2) continue;
        via[other] = c;
        queue[tail++] = other;
      }
    }
    // Walking back from column ej, path cells alternate -, +, -, ... ending at row ei.
    std::vector<int> path;
    for (int node = m + ej; node != ei;) {
      const int c = via[node];
      path.push_back(c);
      node = node < m ? m + basis[c].j : basis[c].i;
    }
    int leave = -1;
    double theta = 0.0;
    for (std::size_t t = 0; t < path.size(); t += 2) {
      if (leave < 0 || basis[path[t]].x < theta) {
        theta = basis[path[t]].x;
        leave = path[t];
      }
    }
    for (std::size_t t = 0; t < path.size(); ++t) basis[path[t]].x += t % 2 == 0 ? -theta : theta;
    basis[leave] = {ei, ej, theta};
  }
  return false;
}

}  // namespace

Matrix sinkhorn(const Matrix& B, const Vector& rows, const Vector& cols, double eps, int max_iters,
                double tol, bool* converged) {
  const Eigen::Index m = B.rows(), n = B.cols();
  const Vector log_r = rows.array().log();
  const Vector log_c = cols.array().log();
  // Plan = exp(B/cur + f 1' + 1 g') with scaled dual potentials f, g.
  Vector f = Vector::Zero(m);
  Vector g = Vector::Zero(n);
  Vector tmp_n(n), tmp_m(m), u(m), v(n), Kv(m), Ktu(n);
  // Anneal eps down from the payoff range by factors of 8, warm-starting the
  // scaled potentials; small eps alone converges very slowly.
  const double bmax = B.maxCoeff();
  const double range = bmax - B.minCoeff();
  double cur = eps;
  while (cur * 8.0 < range) cur *= 8.0;
  int used = 0;
  bool done = false;
  Matrix K, E;
  while (true) {
    const bool final_stage = cur <= eps;
    K = B / cur;
    const double stage_tol = final_stage ? tol : std::max(tol, 1e-4);
    // Plain kernel scaling is much cheaper than log-sum-exp and safe while
    // exp(range / cur) stays far from overflow.
    const bool kernel = range / cur <= 200.0;
    if (kernel) {
      E = (K.array() - bmax / cur).exp().matrix();
      const double shift = 0.5 * (f.maxCoeff() + f.minCoeff());
      u = (f.array() - shift + bmax / cur).exp().matrix();
      v = (g.array() + shift).exp().matrix();
    }
    double checkpoint = -1.0;
    bool stalled = false;
    for (int local = 1; used < max_iters; ++used, ++local) {
      double err = 0.0;
      if (kernel) {
        u = rows.cwiseQuotient(E * v);
        v = cols.cwiseQuotient(E.transpose() * u);
        // Columns are exact after the v-update; measure the row error.
        err = (u.cwiseProduct(E * v) - rows).lpNorm<1>();
        if (!std::isfinite(err)) break;
      } else {
        for (Eigen::Index a = 0; a < m; ++a) {
          tmp_n = K.row(a).transpose() + g;
          f(a) = log_r(a) - log_sum_exp(tmp_n);
        }
        for (Eigen::Index b = 0; b < n; ++b) {
          tmp_m = K.col(b) + f;
          g(b) = log_c(b) - log_sum_exp(tmp_m);
        }
        for (Eigen::Index a = 0; a < m; ++a) {
          tmp_n = K.row(a).transpose() + g;
          err += std::abs(std::exp(f(a) + log_sum_exp(tmp_n)) - rows(a));
        }
      }
      if (err <= stage_tol) {
        done = final_stage;
        break;
      }
      // The error decays geometrically; give up early when the observed rate
      // cannot reach the tolerance within the remaining budget.
      if (local % 50 == 0) {
        if (checkpoint > 0.0) {
          const double rate = err / checkpoint;
          const double needed = rate < 1.0 ? 50.0 * std::log(stage_tol / err) / std::log(rate) : 1e300;
          if (needed > max_iters - used) {
            stalled = true;
            break;
          }
        }
        checkpoint = err;
      }
    }
    if (kernel) {
      f = u.array().log() - bmax / cur;
      g = v.array().log();
      if (!f.allFinite() || !g.allFinite()) {
        stalled = true;
        done = false;
      }
    }
    if (final_stage || stalled || used >= max_iters) break;
    const double next = std::max(eps, cur / 8.0);
    f *= cur / next;
    g *= cur / next;
    cur = next;
  }
  if (converged) *converged = done;
  if (cur > eps) K = B / eps;
  Matrix Q(m, n);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < n; ++b) Q(a, b) = std::exp(K(a, b) + f(a) + g(b));
  if (!Q.allFinite()) {
    if (converged) *converged = false;
    Q = rows * cols.transpose() / rows.sum();
  }
  return Q;
}

Matrix round_to_marginals(Matrix F, const Vector& rows, const Vector& cols) {
  const Vector rs = F.rowwise().sum();
  for (Eigen::Index a = 0; a < F.rows(); ++a)
    if (rs(a) > rows(a)) F.row(a) *= rows(a) / rs(a);
  const Vector cs = F.colwise().sum().transpose();
  for (Eigen::Index b = 0; b < F.cols(); ++b)
    if (cs(b) > cols(b)) F.col(b) *= cols(b) / cs(b);
  // Both deficits are nonnegative up to round-off; clamping keeps F >= 0.
  const Vector err_r = (rows - F.rowwise().sum()).cwiseMax(0.0);
  const Vector err_c = (cols - F.colwise().sum().transpose()).cwiseMax(0.0);
  const double mass = err_r.lpNorm<1>();
  if (mass > 0.0) F += err_r * err_c.transpose() / mass;
  return F;
}

Matrix exact_transport(const Matrix& B, const Vector& r_child, const Vector& r_parent) {
  check_marginals(B, r_child, r_parent);
  const auto rows = support_of(r_parent);
  const auto cols = support_of(r_child);
  const int m = static_cast<int>(rows.size()), n = static_cast<int>(cols.size());
  Matrix Q = Matrix::Zero(B.rows(), B.cols());
  if (m == 0 || n == 0) return Q;
  Matrix cost(m, n), sub;
  Vector rr(m), cc(n);
  for (int a = 0; a < m; ++a) rr(a) = r_parent(rows[a]);
  for (int b = 0; b < n; ++b) cc(b) = r_child(cols[b]);
  cc *= rr.sum() / cc.sum();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < n; ++b) cost(a, b) = B(rows[a], cols[b]);
  if (!transport_simplex(cost, rr, cc, sub)) {
    // Pivot budget exhausted (cycling on a degenerate basis): solve the LP.
    LpProblem lp;
    lp.c = cost.transpose().reshaped();
    lp.a_eq = Matrix::Zero(m + n, m * n);
    lp.b_eq.resize(m + n);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < n; ++b) {
        lp.a_eq(a, a * n + b) = 1.0;
        lp.a_eq(m + b, a * n + b) = 1.0;
      }
    lp.b_eq << rr, cc;
    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::kOptimal) throw std::runtime_error("transport LP failed");
    sub = res.x.cwiseMax(0.0).reshaped(n, m).transpose();
  }
  sub = round_to_marginals(sub, rr, cc);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < n; ++b) Q(rows[a], cols[b]) = sub(a, b);
  return Q;
}

Matrix recover_pairwise(const Matrix& B, const Vector& r_child, const Vector& r_parent,
                        const TransportConfig& cfg) {
  check_marginals(B, r_child, r_parent);
  if (cfg.exact) return exact_transport(B, r_child, r_parent);

  const auto rows = support_of(r_parent);
  const auto cols = support_of(r_child);
  const int m = static_cast<int>(rows.size()), n = static_cast<int>(cols.size());
  Matrix Q = Matrix::Zero(B.rows(), B.cols());
  if (m == 0 || n == 0) return Q;
  Matrix sub(m, n);
  Vector rr(m), cc(n);
  for (int a = 0; a < m; ++a) rr(a) = r_parent(rows[a]);
  for (int b = 0; b < n; ++b) cc(b) = r_child(cols[b]);
  // Equalize total mass so the rounded plan can meet both marginals.
  cc *= rr.sum() / cc.sum();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < n; ++b) sub(a, b) = B(rows[a], cols[b]);

  const double scale = sub.cwiseAbs().maxCoeff();
  Matrix plan;
  if (scale == 0.0 || m == 1 || n == 1) {
    plan = rr * cc.transpose() / rr.sum();
  } else {
    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : 1e-2 * scale;
    bool converged = false;
    plan = sinkhorn(sub, rr, cc, eps, cfg.max_iters, cfg.tol, &converged);
    // Near-degenerate plans make Sinkhorn crawl at small eps; the LP is cheap here.
    if (!converged) return exact_transport(B, r_child, r_parent);
  }
  plan = round_to_marginals(plan, rr, cc);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < n; ++b) Q(rows[a], cols[b]) = plan(a, b);
  return Q;
}

}  // namespace agm
