#include <doctest.h>

#include <algorithm>
#include <set>

#include "agm/graph.hpp"
#include "agm/linalg.hpp"

using namespace agm;

TEST_SUITE("graph") {

TEST_CASE("chain orients edges away from the root") {
  const TreeGraph t = build_tree(3, {{1, 2}, {2, 3}}, 1);
  CHECK(t.size() == 3);
  CHECK(t.parent(1) == kDummyNode);
  CHECK(t.parent(2) == 1);
  CHECK(t.parent(3) == 2);
  CHECK(t.edges() == std::vector<Edge>{{1, 2}, {2, 3}});
  CHECK(topo_order(t) == std::vector<NodeId>{3, 2, 1});
}

TEST_CASE("single node hangs below the dummy parent") {
  const TreeGraph t = build_tree(1, {}, 1);
  CHECK(t.parent(1) == kDummyNode);
  CHECK(t.edges().empty());
  CHECK(topo_order(t) == std::vector<NodeId>{1});
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(build_tree(3, {{1, 2}, {2, 3}, {3, 1}}, 1), StructureError);
  CHECK_THROWS_AS(build_tree(4, {{1, 2}, {3, 4}}, 1), StructureError);
  CHECK_THROWS_AS(build_tree(3, {{1, 2}, {2, 1}}, 1), StructureError);
  CHECK_THROWS_AS(build_tree(3, {{1, 2}, {2, 4}}, 1), StructureError);
  CHECK_THROWS_AS(build_tree(2, {{1, 1}}, 1), StructureError);
  CHECK_THROWS_AS(build_tree(2, {{1, 2}}, 3), StructureError);
  CHECK_THROWS_AS(build_tree(0, {}, 1), StructureError);
}

TEST_CASE("star rooted at the centre lists leaves first") {
  const TreeGraph t = make_star(4);
  const auto order = topo_order(t);
  CHECK(order.back() == 1);
  CHECK(std::set<NodeId>(order.begin(), order.end() - 1) == std::set<NodeId>{2, 3, 4});
  CHECK(t.children(1) == std::vector<NodeId>{2, 3, 4});
}

TEST_CASE("children precede parents and edges count n-1 on random trees") {
  for (int s = 0; s < 100; ++s) {
    Rng rng(s);
    const int n = 1 + static_cast<int>(rng.below(12));
    std::vector<Edge> edges;
    for (int v = 2; v <= n; ++v) edges.push_back({1 + static_cast<int>(rng.below(v - 1)), v});
    rng.shuffle(edges);
    for (auto& e : edges)
      if (rng.uniform() < 0.5) std::swap(e.first, e.second);
    const NodeId root = 1 + static_cast<int>(rng.below(n));
    const TreeGraph t = build_tree(n, edges, root);
    CHECK(static_cast<int>(t.edges().size()) == n - 1);
    const auto order = topo_order(t);
    std::vector<int> pos(n + 1, -1);
    for (std::size_t j = 0; j < order.size(); ++j) pos[order[j]] = static_cast<int>(j);
    CHECK(std::count(pos.begin() + 1, pos.end(), -1) == 0);
    for (int v = 1; v <= n; ++v) {
      for (NodeId c : t.children(v)) {
        CHECK(pos[c] < pos[v]);
        CHECK(t.parent(c) == v);
      }
    }
    // Re-rooting keeps the undirected edge set.
    const TreeGraph other = build_tree(n, edges, 1 + static_cast<int>(rng.below(n)));
    CHECK(other.undirected_edges() == t.undirected_edges());
  }
}

TEST_CASE("traversal order is deterministic") {
  const std::vector<Edge> edges{{1, 2}, {1, 3}, {3, 4}, {3, 5}};
  CHECK(topo_order(build_tree(5, edges, 1)) == topo_order(build_tree(5, edges, 1)));
}

}
