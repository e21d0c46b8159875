#include "agm/graph.hpp"

#include <algorithm>
#include <set>

namespace agm {

std::vector<Edge> TreeGraph::undirected_edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (auto [u, v] : edges_) out.emplace_back(std::min(u, v), std::max(u, v));
  std::sort(out.begin(), out.end());
  return out;
}

TreeGraph build_tree(int n, const std::vector<Edge>& edges, NodeId root) {
  if (n < 1) throw StructureError("tree needs at least one node");
  if (root < 1 || root > n) {
    throw StructureError("root " + std::to_string(root) + " outside 1.." + std::to_string(n));
  }
  std::vector<std::vector<NodeId>> adj(n + 1);
  std::set<Edge> seen;
  for (auto [u, v] : edges) {
    if (u < 1 || u > n || v < 1 || v > n) {
      throw StructureError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                           ") has a node outside 1.." + std::to_string(n));
    }
    if (u == v) throw StructureError("self loop on node " + std::to_string(u));
    Edge key{std::min(u, v), std::max(u, v)};
    if (!seen.insert(key).second) {
      throw StructureError("duplicate edge (" + std::to_string(key.first) + "," +
                           std::to_string(key.second) + ")");
    }
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  if (edges.size() >= static_cast<std::size_t>(n)) {
    throw StructureError("cycle detected: " + std::to_string(edges.size()) + " edges on " +
                         std::to_string(n) + " nodes");
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  TreeGraph t;
  t.n_ = n;
  t.root_ = root;
  t.parent_.assign(n + 1, -1);
  t.children_.assign(n + 1, {});
  t.parent_[root] = kDummyNode;

  // Breadth-first orientation; ascending neighbour order keeps it deterministic.
  std::vector<NodeId> bfs{root};
  std::vector<char> visited(n + 1, 0);
  visited[root] = 1;
  for (std::size_t head = 0; head < bfs.size(); ++head) {
    NodeId u = bfs[head];
    for (NodeId v : adj[u]) {
      if (v == t.parent_[u]) continue;
      if (visited[v]) throw StructureError("cycle detected through node " + std::to_string(v));
      visited[v] = 1;
      t.parent_[v] = u;
      t.children_[u].push_back(v);
      bfs.push_back(v);
    }
  }
  if (bfs.size() != static_cast<std::size_t>(n)) {
    throw StructureError("graph is disconnected: reached " + std::to_string(bfs.size()) + " of " +
                         std::to_string(n) + " nodes from root");
  }
  for (NodeId v = 1; v <= n; ++v) {
    if (v != root) t.edges_.emplace_back(t.parent_[v], v);
  }

  // Post-order DFS with children visited in ascending order gives a
  // leaves-first sequence.
  t.topo_.reserve(n);
  std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < t.children_[node].size()) {
      NodeId c = t.children_[node][next++];
      stack.emplace_back(c, 0);
    } else {
      t.topo_.push_back(node);
      stack.pop_back();
    }
  }
  return t;
}

TreeGraph make_chain(int n) {
  std::vector<Edge> e;
  for (int i = 1; i < n; ++i) e.emplace_back(i, i + 1);
  return build_tree(n, e, 1);
}

TreeGraph make_star(int n) {
  std::vector<Edge> e;
  for (int i = 2; i <= n; ++i) e.emplace_back(1, i);
  return build_tree(n, e, 1);
}

std::vector<NodeId> topo_order(const TreeGraph& tree) { return tree.topo_order(); }

}  // namespace agm
