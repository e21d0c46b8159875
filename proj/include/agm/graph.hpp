#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agm {

/// Raised when an edge list does not describe a tree over 1..n.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

/// Index reserved for the single-state dummy parent placed above the root.
inline constexpr NodeId kDummyNode = 0;

/// Rooted tree over label nodes 1..n. Node 0 is the dummy parent of the
/// root, so every real node has exactly one incoming (parent, child) edge.
/// Immutable once built.
class TreeGraph {
 public:
  TreeGraph() = default;

  int size() const { return n_; }
  NodeId root() const { return root_; }

  /// Parent of `node`; the root maps to kDummyNode.
  NodeId parent(NodeId node) const { return parent_.at(node); }

  /// Children of `node` in ascending index order.
  const std::vector<NodeId>& children(NodeId node) const { return children_.at(node); }

  /// The n-1 real edges oriented (parent, child), ordered by child index.
  const std::vector<Edge>& edges() const { return edges_; }

  /// Leaves-first order; each node appears after all of its children.
  const std::vector<NodeId>& topo_order() const { return topo_; }

  /// Undirected edge set with each pair stored as (min, max), sorted.
  std::vector<Edge> undirected_edges() const;

  friend TreeGraph build_tree(int n, const std::vector<Edge>& edges, NodeId root);

 private:
  int n_ = 0;
  NodeId root_ = 1;
  std::vector<NodeId> parent_;                 // size n+1, parent_[0] unused
  std::vector<std::vector<NodeId>> children_;  // size n+1
  std::vector<Edge> edges_;
  std::vector<NodeId> topo_;
};

/// Orients an undirected edge list away from `root`. Throws StructureError on
/// out-of-range nodes, self loops, duplicate edges, cycles or disconnection.
TreeGraph build_tree(int n, const std::vector<Edge>& edges, NodeId root);

/// Convenience: chain 1-2-...-n rooted at 1.
TreeGraph make_chain(int n);

/// Convenience: star with centre 1 and leaves 2..n, rooted at 1.
TreeGraph make_star(int n);

std::vector<NodeId> topo_order(const TreeGraph& tree);

}  // namespace agm
