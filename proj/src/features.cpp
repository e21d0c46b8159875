#include "agm/features.hpp"

#include <string>

namespace agm {

FeatureTemplate feature_template(int d, int d_e, int k) {
  if (d < 0 || d_e < 0) throw DimensionError("input dimensions must be nonnegative");
  if (k < 2) throw DimensionError("need at least two labels");
  return FeatureTemplate{k, d, d_e};
}

void validate_instance(const Instance& inst, const FeatureTemplate& tpl) {
  const int n = inst.size();
  if (static_cast<int>(inst.x.size()) != n + 1) throw DimensionError("node input count != n");
  for (int i = 1; i <= n; ++i) {
    if (inst.x[i].size() != tpl.d) {
      throw DimensionError("node " + std::to_string(i) + " input has length " +
                           std::to_string(inst.x[i].size()) + ", expected " + std::to_string(tpl.d));
    }
  }
  if (tpl.d_e > 0) {
    if (static_cast<int>(inst.x_edge.size()) != n + 1) throw DimensionError("edge input count != n");
    for (int i = 1; i <= n; ++i) {
      if (i == inst.tree.root()) continue;
      if (inst.x_edge[i].size() != tpl.d_e) {
        throw DimensionError("edge into node " + std::to_string(i) + " has wrong input length");
      }
    }
  }
  if (inst.labeled()) {
    if (static_cast<int>(inst.y.size()) != n) throw DimensionError("label count != n");
    for (int i = 0; i < n; ++i) {
      if (inst.y[i] < 1 || inst.y[i] > tpl.k) {
        throw DimensionError("label " + std::to_string(inst.y[i]) + " at node " +
                             std::to_string(i + 1) + " outside 1.." + std::to_string(tpl.k));
      }
    }
  }
}

EncodedTruth encode_truth(const TreeGraph& tree, const Labeling& y, int k) {
  const int n = tree.size();
  if (static_cast<int>(y.size()) != n) throw DimensionError("label count != n");
  EncodedTruth t;
  t.z.assign(n + 1, Vector());
  t.Z.assign(n + 1, Matrix());
  for (int i = 1; i <= n; ++i) {
    t.z[i] = Vector::Zero(k);
    t.z[i](y[i - 1] - 1) = 1.0;
  }
  for (int i = 1; i <= n; ++i) {
    const NodeId pt = tree.parent(i);
    if (pt == kDummyNode) {
      t.Z[i] = t.z[i].transpose();
    } else {
      t.Z[i] = Matrix::Zero(k, k);
      t.Z[i](y[pt - 1] - 1, y[i - 1] - 1) = 1.0;
    }
  }
  return t;
}

ModelParams ModelParams::zeros(const FeatureTemplate& tpl) {
  return {Vector::Zero(tpl.node_dim()), Vector::Zero(tpl.edge_dim())};
}

MomentVector MomentVector::zeros(const FeatureTemplate& tpl) {
  return {Vector::Zero(tpl.node_dim()), Vector::Zero(tpl.edge_dim())};
}

MomentVector& MomentVector::operator+=(const MomentVector& o) {
  node_part += o.node_part;
  edge_part += o.edge_part;
  return *this;
}

MomentVector& MomentVector::operator*=(double s) {
  node_part *= s;
  edge_part *= s;
  return *this;
}

double MomentVector::linf() const {
  double m = 0.0;
  if (node_part.size()) m = std::max(m, node_part.cwiseAbs().maxCoeff());
  if (edge_part.size()) m = std::max(m, edge_part.cwiseAbs().maxCoeff());
  return m;
}

MomentVector operator-(const MomentVector& a, const MomentVector& b) {
  return {a.node_part - b.node_part, a.edge_part - b.edge_part};
}

namespace {

double edge_input(const Instance& inst, const FeatureTemplate& tpl, int node, int j) {
  return j == tpl.d_e ? 1.0 : inst.x_edge[node](j);
}

double node_input(const Instance& inst, const FeatureTemplate& tpl, int node, int j) {
  return j == tpl.d ? 1.0 : inst.x[node](j);
}

}  // namespace

Potentials assemble_potentials(const ModelParams& params, const Instance& inst,
                               const FeatureTemplate& tpl) {
  if (params.theta_v.size() != tpl.node_dim() || params.theta_e.size() != tpl.edge_dim()) {
    throw DimensionError("parameter vector does not match the feature template");
  }
  const int n = inst.size();
  const int k = tpl.k;
  Potentials pots;
  pots.b.assign(n + 1, Vector());
  pots.B.assign(n + 1, Matrix());
  for (int i = 1; i <= n; ++i) {
    if (inst.x[i].size() != tpl.d) throw DimensionError("node input length mismatch");
    Vector b(k);
    for (int a = 0; a < k; ++a) {
      double s = 0.0;
      for (int j = 0; j <= tpl.d; ++j) s += params.theta_v(tpl.node_index(a, j)) * node_input(inst, tpl, i, j);
      b(a) = s;
    }
    pots.b[i] = std::move(b);
    if (inst.tree.parent(i) == kDummyNode) {
      pots.B[i] = Matrix::Zero(1, k);
      continue;
    }
    Matrix B(k, k);
    for (int a = 0; a < k; ++a) {
      for (int c = 0; c < k; ++c) {
        double s = 0.0;
        for (int j = 0; j <= tpl.d_e; ++j) s += params.theta_e(tpl.edge_index(a, c, j)) * edge_input(inst, tpl, i, j);
        B(a, c) = s;
      }
    }
    pots.B[i] = std::move(B);
  }
  return pots;
}

MomentVector joint_features(const Instance& inst, const Labeling& y, const FeatureTemplate& tpl) {
  const int n = inst.size();
  if (static_cast<int>(y.size()) != n) throw DimensionError("label count != n");
  MomentVector m = MomentVector::zeros(tpl);
  for (int i = 1; i <= n; ++i) {
    const int a = y[i - 1] - 1;
    for (int j = 0; j <= tpl.d; ++j) m.node_part(tpl.node_index(a, j)) += node_input(inst, tpl, i, j);
    const NodeId pt = inst.tree.parent(i);
    if (pt == kDummyNode) continue;
    const int ap = y[pt - 1] - 1;
    for (int j = 0; j <= tpl.d_e; ++j) m.edge_part(tpl.edge_index(ap, a, j)) += edge_input(inst, tpl, i, j);
  }
  return m;
}

MomentVector expected_features(const Instance& inst, const std::vector<Vector>& r,
                               const std::vector<Matrix>& Q, const FeatureTemplate& tpl) {
  const int n = inst.size();
  const int k = tpl.k;
  MomentVector m = MomentVector::zeros(tpl);
  for (int i = 1; i <= n; ++i) {
    for (int a = 0; a < k; ++a) {
      const double w = r[i](a);
      if (w == 0.0) continue;
      for (int j = 0; j <= tpl.d; ++j) m.node_part(tpl.node_index(a, j)) += w * node_input(inst, tpl, i, j);
    }
    if (inst.tree.parent(i) == kDummyNode) continue;
    for (int a = 0; a < k; ++a) {
      for (int c = 0; c < k; ++c) {
        const double w = Q[i](a, c);
        if (w == 0.0) continue;
        for (int j = 0; j <= tpl.d_e; ++j) m.edge_part(tpl.edge_index(a, c, j)) += w * edge_input(inst, tpl, i, j);
      }
    }
  }
  return m;
}

MomentVector empirical_moments(const std::vector<Instance>& data, const FeatureTemplate& tpl) {
  if (data.empty()) throw DimensionError("empirical moments of an empty dataset");
  MomentVector m = MomentVector::zeros(tpl);
  for (const Instance& inst : data) {
    if (!inst.labeled()) throw DimensionError("empirical moments need labeled instances");
    m += joint_features(inst, inst.y, tpl);
  }
  m *= 1.0 / static_cast<double>(data.size());
  return m;
}

double labeling_score(const Potentials& pots, const TreeGraph& tree, const Labeling& y) {
  double s = 0.0;
  for (int i = 1; i <= tree.size(); ++i) {
    s += pots.b[i](y[i - 1] - 1);
    const NodeId pt = tree.parent(i);
    if (pt != kDummyNode) s += pots.B[i](y[pt - 1] - 1, y[i - 1] - 1);
  }
  return s;
}

}  // namespace agm
