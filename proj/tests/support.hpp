#pragma once

#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include <motifcc/graph.hpp>
#include <motifcc/rng.hpp>

namespace motifcc::fixtures {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

inline ColoredGraph make_graph(std::size_t n, const EdgeList& edges) { return ColoredGraph::from_edges(n, edges); }

inline ColoredGraph with_colors(ColoredGraph g, unsigned k, std::vector<Color> colors) {
  g.set_colors(k, std::move(colors));
  return g;
}

inline ColoredGraph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {2, 0}}); }
inline ColoredGraph path(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}
inline ColoredGraph cycle(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return make_graph(n, e);
}
inline ColoredGraph star(std::size_t leaves) {
  EdgeList e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}
inline ColoredGraph clique(std::size_t n) {
  EdgeList e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}
/// K_c with a path of p extra nodes hanging from node c-1.
inline ColoredGraph lollipop(std::size_t c, std::size_t p) {
  EdgeList e;
  for (NodeId i = 0; i < c; ++i)
    for (NodeId j = i + 1; j < c; ++j) e.emplace_back(i, j);
  for (NodeId i = 0; i < p; ++i) e.emplace_back(static_cast<NodeId>(c - 1 + i), static_cast<NodeId>(c + i));
  return make_graph(c + p, e);
}

/// Uniform random simple graph with exactly m edges (m <= n(n-1)/2).
inline ColoredGraph random_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed, 77);
  std::set<std::pair<NodeId, NodeId>> seen;
  EdgeList e;
  while (e.size() < m) {
    auto a = static_cast<NodeId>(rng.below(n)), b = static_cast<NodeId>(rng.below(n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) e.emplace_back(a, b);
  }
  return make_graph(n, e);
}

using Copy = std::vector<std::pair<NodeId, NodeId>>;

/// Edge set of a tree copy, each edge as (min, max), sorted.
inline Copy normalize_copy(Copy edges) {
  for (auto& [a, b] : edges)
    if (a > b) std::swap(a, b);
  std::sort(edges.begin(), edges.end());
  return edges;
}

/// Every colorful k-node tree copy of g, found by trying all (k-1)-edge
/// subsets. Only for small graphs.
inline std::vector<Copy> colorful_tree_copies(const ColoredGraph& g, unsigned k, bool stars = true) {
  EdgeList edges;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    for (NodeId u : g.neighbors(v))
      if (v < u) edges.emplace_back(v, u);
  std::vector<Copy> out;
  Copy pick;
  auto check = [&] {
    std::vector<NodeId> nodes;
    for (auto [a, b] : pick) nodes.insert(nodes.end(), {a, b});
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    // k - 1 edges on k nodes with no cycle: the edges touch exactly k nodes
    // and connect them.
    if (nodes.size() != k) return;
    unsigned seen = 0;
    for (NodeId v : nodes) {
      const unsigned bit = 1u << g.color(v);
      if (seen & bit) return;
      seen |= bit;
    }
    std::vector<std::size_t> parent(k);
    for (std::size_t i = 0; i < k; ++i) parent[i] = i;
    auto idx = [&](NodeId v) { return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin()); };
    auto root = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x];
      return x;
    };
    std::vector<unsigned> degree(k, 0);
    for (auto [a, b] : pick) {
      const auto ra = root(idx(a)), rb = root(idx(b));
      if (ra == rb) return;
      parent[ra] = rb;
      ++degree[idx(a)];
      ++degree[idx(b)];
    }
    if (!stars && k >= 3 && std::find(degree.begin(), degree.end(), k - 1) != degree.end()) return;
    out.push_back(normalize_copy(pick));
  };
  auto rec = [&](auto&& self, std::size_t from) -> void {
    if (pick.size() == k - 1) {
      check();
      return;
    }
    for (std::size_t e = from; e < edges.size(); ++e) {
      pick.push_back(edges[e]);
      self(self, e + 1);
      pick.pop_back();
    }
  };
  if (k == 1) {
    for (NodeId v = 0; v < g.num_nodes(); ++v) out.push_back({});
    return out;
  }
  rec(rec, 0);
  return out;
}

}  // namespace motifcc::fixtures
