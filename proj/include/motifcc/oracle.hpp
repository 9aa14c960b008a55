#pragma once

// Brute-force ground truth for small graphs. Test and acceptance use only.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "graph.hpp"
#include "graphlet.hpp"
#include "treelet.hpp"

namespace motifcc {

class ScaleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleLimits {
  std::uint64_t max_sets = 20'000'000;
};

namespace detail {

/// Visits every connected k-subset exactly once (ESU enumeration). `keep`
/// filters partial sets; it must be monotone under removal.
template <typename Keep, typename Visit>
void for_each_connected_set(const ColoredGraph& g, unsigned k, const OracleLimits& lim, Keep&& keep, Visit&& visit) {
  std::uint64_t visited = 0;
  std::vector<NodeId> sub;
  std::function<void(std::vector<NodeId>, NodeId)> extend = [&](std::vector<NodeId> ext, NodeId root) {
    if (sub.size() == k) {
      if (++visited > lim.max_sets) throw ScaleError("oracle enumeration exceeds its limit");
      visit(std::span<const NodeId>(sub));
      return;
    }
    while (!ext.empty()) {
      const NodeId w = ext.back();
      ext.pop_back();
      sub.push_back(w);
      if (keep(std::span<const NodeId>(sub))) {
        std::vector<NodeId> next = ext;
        for (NodeId u : g.neighbors(w)) {
          if (u <= root) continue;
          if (std::find(sub.begin(), sub.end(), u) != sub.end()) continue;
          if (std::find(next.begin(), next.end(), u) != next.end()) continue;
          // Exclusive neighbor: not adjacent to any earlier member.
          bool exclusive = true;
          for (std::size_t i = 0; i + 1 < sub.size() && exclusive; ++i) exclusive = !g.adjacent(sub[i], u);
          if (exclusive) next.push_back(u);
        }
        extend(std::move(next), root);
      }
      sub.pop_back();
    }
  };
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    sub.assign(1, v);
    if (!keep(std::span<const NodeId>(sub))) continue;
    std::vector<NodeId> ext;
    for (NodeId u : g.neighbors(v))
      if (u > v) ext.push_back(u);
    extend(std::move(ext), v);
  }
}

}  // namespace detail

/// Induced copies of every connected k-node graphlet class.
inline std::map<GraphletSignature, U256> exact_graphlet_counts(const ColoredGraph& g, unsigned k, OracleLimits lim = {}) {
  if (k < 1 || k > kMaxK) throw std::invalid_argument("k must be in [1, 16]");
  std::map<GraphletSignature, U256> out;
  SignatureCache cache;
  detail::for_each_connected_set(
      g, k, lim, [](std::span<const NodeId>) { return true; },
      [&](std::span<const NodeId> set) { out[cache.get(extract_induced(g, set))] += 1; });
  return out;
}

/// Parenthesis code of a rooted tree: "(" + sorted child codes + ")".
inline std::string rooted_code(const std::vector<std::vector<int>>& adj, int node, int parent) {
  std::vector<std::string> kids;
  for (int c : adj[node])
    if (c != parent) kids.push_back(rooted_code(adj, c, node));
  std::sort(kids.begin(), kids.end());
  std::string s = "(";
  for (auto& c : kids) s += c;
  return s + ")";
}

inline std::string unrooted_code(const std::vector<std::vector<int>>& adj) {
  std::string best;
  for (int r = 0; r < static_cast<int>(adj.size()); ++r) {
    auto c = rooted_code(adj, r, -1);
    if (best.empty() || c < best) best = c;
  }
  return best;
}

/// Reads a shape's Euler-tour bits (1 = step down to a new child, 0 = step
/// back up) into an adjacency list rooted at node 0.
inline std::vector<std::vector<int>> shape_tree(TreeletShape s) {
  std::vector<std::vector<int>> adj(1);
  std::vector<int> stack{0};
  const unsigned len = s.length();
  for (unsigned i = 0; i < len; ++i) {
    const bool down = (s.bits >> (len - 1 - i)) & 1u;
    if (down) {
      const int child = static_cast<int>(adj.size());
      adj.emplace_back();
      adj[stack.back()].push_back(child);
      adj[child].push_back(stack.back());
      stack.push_back(child);
    } else {
      stack.pop_back();
    }
  }
  return adj;
}
inline std::string rooted_code(TreeletShape s) { return rooted_code(shape_tree(s), 0, -1); }
inline std::string unrooted_code(TreeletShape s) { return unrooted_code(shape_tree(s)); }

struct ColorfulTreeletCounts {
  /// (root, rooted parenthesis code, colorset) -> copies rooted there.
  std::map<std::tuple<NodeId, std::string, ColorSet>, U256> rooted;
  /// unrooted parenthesis code -> copies.
  std::map<std::string, U256> unrooted;
  U256 total = 0;
};

/// Colorful h-node tree copies of a colored graph: every colorful connected
/// node set, every spanning tree of its induced subgraph.
inline ColorfulTreeletCounts exact_colorful_treelets(const ColoredGraph& g, unsigned h, OracleLimits lim = {}) {
  if (!g.colored()) throw std::invalid_argument("graph must be colored");
  ColorfulTreeletCounts out;
  auto distinct_colors = [&](std::span<const NodeId> set) {
    ColorSet seen = 0;
    for (NodeId v : set) {
      const auto bit = static_cast<ColorSet>(1u << g.color(v));
      if (seen & bit) return false;
      seen |= bit;
    }
    return true;
  };
  std::uint64_t trees = 0;
  detail::for_each_connected_set(g, h, lim, distinct_colors, [&](std::span<const NodeId> set) {
    ColorSet colors = 0;
    for (NodeId v : set) colors = static_cast<ColorSet>(colors | (1u << g.color(v)));
    std::vector<std::pair<int, int>> edges;
    for (unsigned i = 0; i < h; ++i)
      for (unsigned j = i + 1; j < h; ++j)
        if (g.adjacent(set[i], set[j])) edges.emplace_back(i, j);
    // Every (h-1)-edge subset without a cycle is a spanning tree.
    std::vector<int> pick;
    std::function<void(std::size_t)> choose = [&](std::size_t from) {
      if (pick.size() == h - 1) {
        std::vector<int> parent(h);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> root = [&](int x) { return parent[x] == x ? x : parent[x] = root(parent[x]); };
        std::vector<std::vector<int>> adj(h);
        for (int e : pick) {
          const auto [a, b] = edges[e];
          const int ra = root(a), rb = root(b);
          if (ra == rb) return;
          parent[ra] = rb;
          adj[a].push_back(b);
          adj[b].push_back(a);
        }
        if (++trees > lim.max_sets) throw ScaleError("oracle enumeration exceeds its limit");
        out.unrooted[unrooted_code(adj)] += 1;
        out.total += 1;
        for (unsigned r = 0; r < h; ++r) out.rooted[{set[r], rooted_code(adj, static_cast<int>(r), -1), colors}] += 1;
        return;
      }
      for (std::size_t e = from; e + (h - 1 - pick.size()) <= edges.size(); ++e) {
        pick.push_back(static_cast<int>(e));
        choose(e + 1);
        pick.pop_back();
      }
    };
    if (h == 1) {
      out.unrooted["()"] += 1;
      out.total += 1;
      out.rooted[{set[0], "()", colors}] += 1;
      return;
    }
    choose(0);
  });
  return out;
}

}  // namespace motifcc
