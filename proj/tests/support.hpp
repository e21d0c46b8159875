#pragma once

// Independent oracles and fixtures shared by the unit and acceptance tests.
// Everything here works from first principles (enumeration, grids) rather
// than calling the solvers under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "agm/features.hpp"
#include "agm/graph.hpp"
#include "agm/linalg.hpp"
#include "agm/loss.hpp"

namespace agm::testing {

inline Potentials random_potentials(const TreeGraph& tree, int k, Rng& rng, double scale = 1.0) {
  const int n = tree.size();
  Potentials p;
  p.b.assign(n + 1, Vector());
  p.B.assign(n + 1, Matrix());
  for (int i = 1; i <= n; ++i) {
    p.b[i] = Vector(k);
    for (int a = 0; a < k; ++a) p.b[i](a) = rng.uniform(-scale, scale);
    if (tree.parent(i) == kDummyNode) {
      p.B[i] = Matrix::Zero(1, k);
    } else {
      p.B[i] = Matrix(k, k);
      for (int a = 0; a < k; ++a)
        for (int c = 0; c < k; ++c) p.B[i](a, c) = rng.uniform(-scale, scale);
    }
  }
  return p;
}

inline Potentials zero_potentials(const TreeGraph& tree, int k) {
  Rng rng(0);
  Potentials p = random_potentials(tree, k, rng, 0.0);
  return p;
}

inline LossSpec spec_of(LossKind kind, int k, std::uint64_t seed = 7) {
  LossSpec s;
  s.kind = kind;
  s.k = k;
  if (kind == LossKind::kCostSensitive) s.custom = random_ordinal_cost(k, seed);
  return s;
}

inline const std::vector<LossKind>& all_loss_kinds() {
  static const std::vector<LossKind> kinds{LossKind::kZeroOne, LossKind::kAbsolute,
                                           LossKind::kSquared, LossKind::kCostSensitive};
  return kinds;
}

/// Enumerates all k^n labelings (1-based) in lexicographic order.
inline std::vector<Labeling> all_labelings(int n, int k) {
  std::vector<Labeling> out;
  Labeling y(n, 1);
  while (true) {
    out.push_back(y);
    int i = n - 1;
    while (i >= 0 && y[i] == k) y[i--] = 1;
    if (i < 0) break;
    ++y[i];
  }
  return out;
}

/// sum_i b_i[y_i] + sum over real edges of B_i[y_pt(i)][y_i], written out directly.
inline double score_of(const TreeGraph& tree, const Potentials& p, const Labeling& y) {
  double s = 0.0;
  for (int i = 1; i <= tree.size(); ++i) {
    s += p.b[i](y[i - 1] - 1);
    const int par = tree.parent(i);
    if (par != kDummyNode) s += p.B[i](y[par - 1] - 1, y[i - 1] - 1);
  }
  return s;
}

/// Brute-force argmax; the lexicographically first maximizer wins.
inline Labeling brute_map(const TreeGraph& tree, const Potentials& p, int k) {
  Labeling best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const Labeling& y : all_labelings(tree.size(), k)) {
    const double s = score_of(tree, p, y);
    if (s > best_score) {
      best_score = s;
      best = y;
    }
  }
  return best;
}

struct BruteMarginals {
  std::vector<Vector> node;
  std::vector<Matrix> edge;
  double log_partition = 0.0;
};

inline BruteMarginals brute_crf(const TreeGraph& tree, const Potentials& p, int k) {
  const int n = tree.size();
  const auto ys = all_labelings(n, k);
  std::vector<double> s(ys.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < ys.size(); ++t) mx = std::max(mx, s[t] = score_of(tree, p, ys[t]));
  double z = 0.0;
  for (double v : s) z += std::exp(v - mx);
  BruteMarginals m;
  m.log_partition = mx + std::log(z);
  m.node.assign(n + 1, Vector());
  m.edge.assign(n + 1, Matrix());
  for (int i = 1; i <= n; ++i) {
    m.node[i] = Vector::Zero(k);
    m.edge[i] = tree.parent(i) == kDummyNode ? Matrix::Zero(1, k) : Matrix::Zero(k, k);
  }
  for (std::size_t t = 0; t < ys.size(); ++t) {
    const double w = std::exp(s[t] - m.log_partition);
    for (int i = 1; i <= n; ++i) {
      const int yi = ys[t][i - 1] - 1;
      m.node[i](yi) += w;
      const int par = tree.parent(i);
      m.edge[i](par == kDummyNode ? 0 : ys[t][par - 1] - 1, yi) += w;
    }
  }
  return m;
}

/// a'r + min_j (L r)_j, the node-game payoff of adversary strategy r.
inline double node_payoff(const Vector& a, const Matrix& L, const Vector& r) {
  return a.dot(r) + (L * r).minCoeff();
}

/// Maximum of the concave node payoff over the simplex by grid search: a full
/// grid at resolution 1/20, then repeated zooms (step / 4 over a box of two
/// old steps around the incumbent) until the step reaches `final_step`.
inline double grid_node_game(const Vector& a, const Matrix& L, double final_step = 1e-4) {
  const int k = static_cast<int>(a.size());
  const int free = k - 1;
  Vector best_r = Vector::Constant(k, 1.0 / k);
  double best = node_payoff(a, L, best_r);
  auto visit = [&](const Vector& lo, double step, int count) {
    std::vector<int> idx(free, 0);
    Vector r(k);
    while (true) {
      double rest = 1.0;
      bool ok = true;
      for (int j = 0; j < free; ++j) {
        r(j) = lo(j) + step * idx[j];
        if (r(j) < -1e-15) ok = false;
        rest -= r(j);
      }
      if (ok && rest >= -1e-12) {
        r(free) = std::max(0.0, rest);
        for (int j = 0; j < free; ++j) r(j) = std::max(0.0, r(j));
        const double v = node_payoff(a, L, r);
        if (v > best) {
          best = v;
          best_r = r;
        }
      }
      int j = 0;
      while (j < free && idx[j] == count) idx[j++] = 0;
      if (j == free) return;
      ++idx[j];
    }
  };
  if (free == 0) return best;
  double step = 1.0 / 20.0;
  visit(Vector::Zero(free), step, 20);
  while (step > final_step) {
    const double next = std::max(final_step, step / 4.0);
    const int half = static_cast<int>(std::ceil(2.0 * step / next));
    Vector lo(free);
    for (int j = 0; j < free; ++j) {
      // Snap the box to the global lattice of the new step.
      lo(j) = std::max(0.0, std::round((best_r(j) - half * next) / next) * next);
    }
    visit(lo, next, 2 * half);
    step = next;
  }
  return best;
}

/// Instance on `tree` with node-identity one-hot inputs (d = n) and no edge inputs.
inline Instance one_hot_instance(const TreeGraph& tree, const Labeling& y = {}) {
  const int n = tree.size();
  Instance inst;
  inst.tree = tree;
  inst.x.assign(n + 1, Vector());
  inst.x_edge.assign(n + 1, Vector());
  for (int i = 1; i <= n; ++i) inst.x[i] = Vector::Unit(n, i - 1);
  inst.y = y;
  return inst;
}

inline Instance random_instance(const TreeGraph& tree, int k, int d, int d_e, Rng& rng,
                                bool labeled = true) {
  const int n = tree.size();
  Instance inst;
  inst.tree = tree;
  inst.x.assign(n + 1, Vector());
  inst.x_edge.assign(n + 1, Vector());
  for (int i = 1; i <= n; ++i) {
    inst.x[i] = Vector(d);
    for (int j = 0; j < d; ++j) inst.x[i](j) = rng.uniform(-1.0, 1.0);
    if (tree.parent(i) != kDummyNode) {
      inst.x_edge[i] = Vector(d_e);
      for (int j = 0; j < d_e; ++j) inst.x_edge[i](j) = rng.uniform(-1.0, 1.0);
    }
    if (labeled) inst.y.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k))));
  }
  return inst;
}

inline ModelParams random_params(const FeatureTemplate& tpl, Rng& rng, double scale = 1.0) {
  ModelParams p = ModelParams::zeros(tpl);
  for (Eigen::Index j = 0; j < p.theta_v.size(); ++j) p.theta_v(j) = rng.uniform(-scale, scale);
  for (Eigen::Index j = 0; j < p.theta_e.size(); ++j) p.theta_e(j) = rng.uniform(-scale, scale);
  return p;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace agm::testing
