#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "agm/linalg.hpp"

namespace agm {

class LossError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// k x k per-node loss table; entry (a-1, b-1) = loss(predicted=a, actual=b).
class LossMatrix {
 public:
  LossMatrix() = default;
  /// Validates: square, finite, nonnegative.
  explicit LossMatrix(Matrix entries);

  int k() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  /// 1-based label access.
  double operator()(int predicted, int actual) const { return m_(predicted - 1, actual - 1); }
  bool is_zero_one() const;

 private:
  Matrix m_;
};

enum class LossKind { kZeroOne, kAbsolute, kSquared, kCostSensitive };

enum class NodeWeighting {
  kNone,
  /// Weight of node i in a tree of n nodes is 2i/(n+1), so weights average to one.
  kPosition,
  /// Caller-supplied node_weights, used as given.
  kExplicit,
};

struct LossSpec {
  LossKind kind = LossKind::kZeroOne;
  int k = 2;
  NodeWeighting weighting = NodeWeighting::kNone;
  std::vector<double> node_weights;
  std::optional<Matrix> custom;  // cost_sensitive only

  /// Short stable name, e.g. "zero_one", "absolute-weighted".
  std::string name() const;
  /// Canonical text form; parse_loss_spec() inverts it.
  std::string canonical() const;
  /// FNV-1a hash of canonical(), stored in model files.
  std::uint64_t hash() const;
};

LossKind parse_loss_kind(const std::string& s);
std::string to_string(LossKind kind);

/// Accepts "zero_one", "absolute", "squared", "cost_sensitive" with optional
/// ":weighted" suffix, or the canonical() form.
LossSpec parse_loss_spec(const std::string& text, int k);

/// Base (unweighted) k x k matrix for a built-in kind; label values are 1..k.
Matrix base_loss(LossKind kind, int k);

/// Loss matrix of `node` (1-based) in a tree with `n_nodes` nodes.
LossMatrix make_loss(const LossSpec& spec, int node, int n_nodes);

/// One matrix per node, index 0 unused.
std::vector<LossMatrix> make_losses(const LossSpec& spec, int n_nodes);

/// Per-node average of L_i[predicted_i][truth_i].
double evaluate_loss(const LossSpec& spec, const Labeling& predicted, const Labeling& truth);

/// Sum (not average) of per-node losses, the quantity the training games use.
double total_loss(const std::vector<LossMatrix>& losses, const Labeling& predicted,
                  const Labeling& truth);

/// Ordinal loss |pi(a) - pi(b)| under a seeded random order pi of the labels.
Matrix random_ordinal_cost(int k, std::uint64_t seed);

}  // namespace agm
