#include "agm/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace agm {

Vector project_simplex(const Vector& v) {
  const int k = static_cast<int>(v.size());
  if (k == 0) throw std::invalid_argument("project_simplex: empty vector");
  if (!v.allFinite()) throw std::invalid_argument("project_simplex: non-finite input");
  std::vector<double> s(v.data(), v.data() + k);
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (int j = 0; j < k; ++j) {
    cum += s[j];
    const double t = (cum - 1.0) / (j + 1);
    if (s[j] - t > 0.0) tau = t;
  }
  Vector out = (v.array() - tau).cwiseMax(0.0).matrix();
  return out / out.sum();
}

namespace {

struct MapResult {
  Labeling labels;
  double score = 0.0;
};

// Max-product over the tree with node potentials `node` and the edge tables of pots.
MapResult max_product(const TreeGraph& tree, const std::vector<Vector>& node,
                      const std::vector<Matrix>& edge) {
  const int n = tree.size();
  const int k = static_cast<int>(node[1].size());
  // belief[i][b]: best score of the subtree of i with y_i = b.
  std::vector<Vector> belief(n + 1);
  // back[i](a): best label of i when its parent takes label a.
  std::vector<std::vector<int>> back(n + 1);
  std::vector<Vector> msg(n + 1);
  for (NodeId i : tree.topo_order()) {
    belief[i] = node[i];
    for (NodeId c : tree.children(i)) belief[i] += msg[c];
    if (tree.parent(i) == kDummyNode) continue;
    const Matrix& B = edge[i];
    msg[i] = Vector(k);
    back[i].assign(k, 0);
    for (int a = 0; a < k; ++a) {
      int best = 0;
      double bv = B(a, 0) + belief[i](0);
      for (int b = 1; b < k; ++b) {
        const double v = B(a, b) + belief[i](b);
        if (v > bv) {
          bv = v;
          best = b;
        }
      }
      msg[i](a) = bv;
      back[i][a] = best;
    }
  }
  MapResult res;
  res.labels.assign(n, 0);
  const NodeId root = tree.root();
  int best = 0;
  for (int b = 1; b < k; ++b)
    if (belief[root](b) > belief[root](best)) best = b;
  res.score = belief[root](best);
  res.labels[root - 1] = best;
  // Parents precede children in reverse leaves-first order.
  const auto& order = tree.topo_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId i = *it;
    if (i == root) continue;
    res.labels[i - 1] = back[i][res.labels[tree.parent(i) - 1]];
  }
  for (int& l : res.labels) ++l;
  return res;
}

}  // namespace

Prediction map_decode(const TreeGraph& tree, const Potentials& pots) {
  MapResult m = max_product(tree, pots.b, pots.B);
  Prediction out;
  out.labels = std::move(m.labels);
  out.score = m.score;
  return out;
}

Prediction predict_map(const ModelParams& params, const Instance& inst,
                       const FeatureTemplate& tpl) {
  return map_decode(inst.tree, assemble_potentials(params, inst, tpl));
}

Prediction probabilistic_game(const TreeGraph& tree, const Potentials& pots,
                              const std::vector<LossMatrix>& losses,
                              const ProbabilisticConfig& cfg) {
  const int n = tree.size();
  const int k = pots.k();
  if (static_cast<int>(losses.size()) != n + 1) {
    throw std::invalid_argument("probabilistic_game: one loss matrix per node required");
  }
  double lmax = 0.0;
  for (NodeId i = 1; i <= n; ++i) lmax = std::max(lmax, losses[i].matrix().maxCoeff());
  const double eta0 = cfg.step0 / std::max(lmax, 1e-12);

  std::vector<Vector> p(n + 1), p_avg(n + 1), r_avg(n + 1), aug(n + 1);
  std::vector<Matrix> Q_avg(n + 1);
  for (NodeId i = 1; i <= n; ++i) {
    p[i] = Vector::Constant(k, 1.0 / k);
    p_avg[i] = p[i];
  }
  auto reset_adversary_average = [&] {
    for (NodeId i = 1; i <= n; ++i) {
      r_avg[i] = Vector::Zero(k);
      Q_avg[i] = Matrix::Zero(pots.B[i].rows(), k);
    }
  };
  reset_adversary_average();

  // max over the adversary at fixed predictor marginals q.
  auto best_response = [&](const std::vector<Vector>& q) {
    for (NodeId i = 1; i <= n; ++i) aug[i] = pots.b[i] + losses[i].matrix().transpose() * q[i];
    return max_product(tree, aug, pots.B);
  };

  Prediction out;
  int avg_count = 0;
  const int max_iters = std::max(1, cfg.max_iters);
  for (int t = 1; t <= max_iters; ++t) {
    const MapResult resp = best_response(p);

    // Restart the averages at powers of two so they cover the recent half.
    if ((t & (t - 1)) == 0) {
      avg_count = 0;
      reset_adversary_average();
    }
    ++avg_count;
    const double w = 1.0 / avg_count;
    for (NodeId i = 1; i <= n; ++i) {
      const int yi = resp.labels[i - 1] - 1;
      p_avg[i] = avg_count == 1 ? p[i] : Vector(p_avg[i] + w * (p[i] - p_avg[i]));
      r_avg[i] *= 1.0 - w;
      r_avg[i](yi) += w;
      Q_avg[i] *= 1.0 - w;
      const NodeId pt = tree.parent(i);
      Q_avg[i](pt == kDummyNode ? 0 : resp.labels[pt - 1] - 1, yi) += w;
    }
    out.iterations = t;

    if (t % std::max(1, cfg.check_every) == 0 || t == max_iters) {
      const double upper = best_response(p_avg).score;
      double lower = 0.0;
      for (NodeId i = 1; i <= n; ++i) {
        lower += (losses[i].matrix() * r_avg[i]).minCoeff() + pots.b[i].dot(r_avg[i]);
        if (tree.parent(i) != kDummyNode) lower += (pots.B[i].array() * Q_avg[i].array()).sum();
      }
      out.score = upper;
      out.gap = std::max(0.0, upper - lower);
      if (out.gap <= cfg.tol) break;
    }

    const double eta = eta0 / std::sqrt(static_cast<double>(t));
    for (NodeId i = 1; i <= n; ++i) {
      p[i] = project_simplex(p[i] - eta * losses[i].matrix().col(resp.labels[i - 1] - 1));
    }
  }
  out.converged = out.gap <= cfg.tol;
  out.distributions = std::move(p_avg);
  return out;
}

Prediction predict_probabilistic(const ModelParams& params, const Instance& inst,
                                 const std::vector<LossMatrix>& losses,
                                 const FeatureTemplate& tpl, const ProbabilisticConfig& cfg) {
  return probabilistic_game(inst.tree, assemble_potentials(params, inst, tpl), losses, cfg);
}

Labeling mode_labels(const std::vector<Vector>& distributions) {
  Labeling out;
  for (std::size_t i = 1; i < distributions.size(); ++i) {
    Eigen::Index best = 0;
    const Vector& d = distributions[i];
    for (Eigen::Index a = 1; a < d.size(); ++a)
      if (d(a) > d(best)) best = a;
    out.push_back(static_cast<int>(best) + 1);
  }
  return out;
}

}  // namespace agm
