#pragma once

#include <stdexcept>
#include <vector>

#include "agm/graph.hpp"
#include "agm/linalg.hpp"

namespace agm {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Index layout of the tied indicator-times-input feature template.
///
/// Node feature (label a, input j) sits at a*(d+1)+j, with j = d the per-label
/// bias. Edge feature (parent label a, child label b, edge input j) sits at
/// (a*k+b)*(d_e+1)+j, with j = d_e the pair bias. Labels here are 0-based.
struct FeatureTemplate {
  int k = 2;
  int d = 0;
  int d_e = 0;

  int node_dim() const { return k * (d + 1); }
  int edge_dim() const { return k * k * (d_e + 1); }
  int node_index(int label0, int input) const { return label0 * (d + 1) + input; }
  int edge_index(int parent_label0, int child_label0, int input) const {
    return (parent_label0 * k + child_label0) * (d_e + 1) + input;
  }
  bool operator==(const FeatureTemplate&) const = default;
};

FeatureTemplate feature_template(int d, int d_e, int k);

/// One structured example. Per-node containers are indexed by node id and
/// have size n+1 (slot 0 belongs to the dummy parent and stays empty).
struct Instance {
  TreeGraph tree;
  std::vector<Vector> x;       // x[i]: input vector of node i, length d
  std::vector<Vector> x_edge;  // x_edge[i]: input of edge (pt(i), i), length d_e; root slot empty
  Labeling y;                  // gold labels, empty when unlabeled

  int size() const { return tree.size(); }
  bool labeled() const { return !y.empty(); }
};

/// Checks input lengths against the template and labels against 1..k.
void validate_instance(const Instance& inst, const FeatureTemplate& tpl);

/// One-hot encodings of a labeling: z[i] is a k-vector, Z[i] the
/// (parent states x k) one-hot pairwise matrix of edge (pt(i), i); the root's
/// Z is 1 x k.
struct EncodedTruth {
  std::vector<Vector> z;
  std::vector<Matrix> Z;
};

EncodedTruth encode_truth(const TreeGraph& tree, const Labeling& y, int k);

struct ModelParams {
  Vector theta_v;
  Vector theta_e;

  static ModelParams zeros(const FeatureTemplate& tpl);
  double squared_norm() const { return theta_v.squaredNorm() + theta_e.squaredNorm(); }
};

/// Node potentials b[i] (k-vectors) and edge potentials B[i] on edge
/// (pt(i), i). The dummy edge above the root is a 1 x k zero row.
struct Potentials {
  std::vector<Vector> b;
  std::vector<Matrix> B;

  int size() const { return static_cast<int>(b.size()) - 1; }
  int k() const { return static_cast<int>(b.at(1).size()); }
};

/// Feature expectations laid out like ModelParams.
struct MomentVector {
  Vector node_part;
  Vector edge_part;

  static MomentVector zeros(const FeatureTemplate& tpl);
  MomentVector& operator+=(const MomentVector& o);
  MomentVector& operator*=(double s);
  double dot(const ModelParams& p) const {
    return node_part.dot(p.theta_v) + edge_part.dot(p.theta_e);
  }
  /// Largest absolute coordinate across both parts.
  double linf() const;
};

MomentVector operator-(const MomentVector& a, const MomentVector& b);

Potentials assemble_potentials(const ModelParams& params, const Instance& inst,
                               const FeatureTemplate& tpl);

/// Phi(x, y): summed node and edge features at labeling y.
MomentVector joint_features(const Instance& inst, const Labeling& y, const FeatureTemplate& tpl);

/// Feature expectation under node marginals r[i] and pairwise marginals Q[i]
/// (edge (pt(i), i)); the root's Q is ignored.
MomentVector expected_features(const Instance& inst, const std::vector<Vector>& r,
                               const std::vector<Matrix>& Q, const FeatureTemplate& tpl);

/// Mean over instances of Phi(x, y_gold).
MomentVector empirical_moments(const std::vector<Instance>& data, const FeatureTemplate& tpl);

/// theta . Phi(x, y) evaluated through potentials.
double labeling_score(const Potentials& pots, const TreeGraph& tree, const Labeling& y);

}  // namespace agm
