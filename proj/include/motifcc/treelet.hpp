#pragma once

// Rooted treelets encoded as Euler-tour bitstrings.
//
// A rooted tree T on h nodes is encoded by a DFS from the root: bit 1 when an
// edge is walked away from the root, bit 0 when it is walked back. The string
// has 2(h-1) bits and is stored in the low bits of a 32-bit word, first bit
// most significant. Children are visited in non-increasing (size, bits) order,
// which makes the encoding canonical. Shapes are totally ordered by
// (size, bits); colored treelets by (size, bits, colorset).

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace motifcc {

using ColorSet = std::uint16_t;

struct TreeletShape {
  std::uint8_t size = 1;
  std::uint32_t bits = 0;

  unsigned length() const { return 2u * (size - 1u); }
  friend auto operator<=>(const TreeletShape&, const TreeletShape&) = default;
  friend bool operator==(const TreeletShape&, const TreeletShape&) = default;

  std::string to_string() const {
    std::string s;
    for (unsigned i = 0; i < length(); ++i) s.push_back(((bits >> (length() - 1 - i)) & 1u) ? '1' : '0');
    return s;
  }
};

struct ColoredTreelet {
  TreeletShape shape;
  ColorSet colors = 0;

  friend auto operator<=>(const ColoredTreelet&, const ColoredTreelet&) = default;
  friend bool operator==(const ColoredTreelet&, const ColoredTreelet&) = default;

  /// 46-bit key: bits above the 16-bit characteristic vector. The size is
  /// popcount(colors), so within one size the key order is the total order.
  std::uint64_t key() const { return (static_cast<std::uint64_t>(shape.bits) << 16) | colors; }
  static ColoredTreelet from_key(std::uint64_t key) {
    ColoredTreelet t;
    t.colors = static_cast<ColorSet>(key & 0xffffu);
    t.shape.size = static_cast<std::uint8_t>(std::popcount(t.colors));
    t.shape.bits = static_cast<std::uint32_t>(key >> 16);
    return t;
  }
};

class TreeletError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline TreeletShape singleton_shape() { return {1, 0}; }

inline ColoredTreelet singleton(Color c) {
  return {singleton_shape(), static_cast<ColorSet>(1u << c)};
}

/// Splits a shape with at least two nodes into (rest, first child): the first
/// child subtree of the root, and the tree with that subtree removed.
inline std::pair<TreeletShape, TreeletShape> split_first_child(TreeletShape t) {
  if (t.size < 2) throw TreeletError("a single node has no children");
  const unsigned len = t.length();
  int depth = 0;
  unsigned close = 0;
  for (unsigned i = 0; i < len; ++i) {
    depth += ((t.bits >> (len - 1 - i)) & 1u) ? 1 : -1;
    if (depth == 0) {
      close = i;
      break;
    }
  }
  // bits[1 .. close-1] is the child's string, bits[close+1 ..] is the rest.
  const unsigned child_len = close - 1;
  const unsigned rest_len = len - close - 1;
  TreeletShape child;
  child.size = static_cast<std::uint8_t>(child_len / 2 + 1);
  child.bits = (t.bits >> (rest_len + 1)) & ((1u << child_len) - 1u);
  TreeletShape rest;
  rest.size = static_cast<std::uint8_t>(t.size - child.size);
  rest.bits = rest_len == 0 ? 0 : (t.bits & ((1u << rest_len) - 1u));
  return {rest, child};
}

/// Attaches `child` as the new first child of the root of `base`. Returns
/// nullopt (FAIL) when `child` is smaller than the current first child.
inline std::optional<TreeletShape> merge_shapes(TreeletShape base, TreeletShape child) {
  if (base.size + child.size > kMaxK) throw TreeletError("merged treelet exceeds 16 nodes");
  if (base.size >= 2 && child < split_first_child(base).second) return std::nullopt;
  TreeletShape out;
  out.size = static_cast<std::uint8_t>(base.size + child.size);
  const unsigned blen = base.length();
  const unsigned clen = child.length();
  out.bits = ((((1u << clen) | child.bits) << 1) << blen) | base.bits;
  return out;
}

/// Colored merge: FAIL on a color clash or when the child-order constraint
/// is violated.
inline std::optional<ColoredTreelet> merge(const ColoredTreelet& base, const ColoredTreelet& child, unsigned k = kMaxK) {
  if (base.shape.size + child.shape.size > k) throw TreeletError("merged treelet exceeds k nodes");
  if (base.colors & child.colors) return std::nullopt;
  auto shape = merge_shapes(base.shape, child.shape);
  if (!shape) return std::nullopt;
  return ColoredTreelet{*shape, static_cast<ColorSet>(base.colors | child.colors)};
}

/// Shape-level canonical decomposition (rest, first child).
inline std::pair<TreeletShape, TreeletShape> canonical_decompose(TreeletShape t) { return split_first_child(t); }

/// Number of root children whose subtree has the same shape as the first
/// child: the multiplicity of the canonical decomposition.
inline unsigned beta(TreeletShape t) {
  auto [rest, first] = split_first_child(t);
  unsigned b = 1;
  while (rest.size >= 2) {
    auto [next_rest, next] = split_first_child(rest);
    if (next != first) break;
    ++b;
    rest = next_rest;
  }
  return b;
}

/// Child shapes of the root, in canonical (non-increasing) order.
inline std::vector<TreeletShape> root_children(TreeletShape t) {
  std::vector<TreeletShape> out;
  while (t.size >= 2) {
    auto [rest, child] = split_first_child(t);
    out.push_back(child);
    t = rest;
  }
  return out;
}

/// Explicit tree on nodes 0..h-1 with node 0 as the root, decoded from or
/// encoded to a shape.
struct TreeStructure {
  std::vector<std::vector<int>> adj;

  std::size_t size() const { return adj.size(); }

  static TreeStructure decode(TreeletShape t) {
    TreeStructure tree;
    tree.adj.resize(1);
    std::vector<int> stack{0};
    const unsigned len = t.length();
    for (unsigned i = 0; i < len; ++i) {
      if ((t.bits >> (len - 1 - i)) & 1u) {
        int node = static_cast<int>(tree.adj.size());
        tree.adj.emplace_back();
        tree.adj[stack.back()].push_back(node);
        tree.adj[node].push_back(stack.back());
        stack.push_back(node);
      } else {
        stack.pop_back();
      }
    }
    return tree;
  }

  /// Canonical shape of this tree rooted at `root`.
  TreeletShape encode(int root) const { return encode_from(root, -1); }

  /// Shape of the subtree hanging from `node` when the tree is rooted at
  /// the other endpoint `parent`.
  TreeletShape encode_from(int node, int parent) const {
    std::vector<TreeletShape> kids;
    for (int c : adj[node])
      if (c != parent) kids.push_back(encode_from(c, node));
    std::sort(kids.begin(), kids.end(), std::greater<>());
    TreeletShape out{1, 0};
    // Build from the last child backwards so the first child ends up first.
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      const unsigned clen = it->length();
      out.bits = ((((1u << clen) | it->bits) << 1) << out.length()) | out.bits;
      out.size = static_cast<std::uint8_t>(out.size + it->size);
    }
    return out;
  }

  int subtree_size(int node, int parent) const {
    int s = 1;
    for (int c : adj[node])
      if (c != parent) s += subtree_size(c, node);
    return s;
  }
};

inline bool is_star(TreeletShape t) {
  if (t.size <= 3) return true;
  auto tree = TreeStructure::decode(t);
  for (const auto& nb : tree.adj)
    if (nb.size() == t.size - 1u) return true;
  return false;
}

/// k-node star rooted at its center.
inline TreeletShape star_shape(unsigned k) {
  TreeletShape s{1, 0};
  for (unsigned i = 1; i < k; ++i) s = *merge_shapes(s, singleton_shape());
  return s;
}

/// Unrooted canonical code: the smallest rooted encoding over all roots.
inline TreeletShape unrooted_canonical(TreeletShape t) {
  auto tree = TreeStructure::decode(t);
  TreeletShape best = t;
  for (int r = 0; r < static_cast<int>(tree.size()); ++r) best = std::min(best, tree.encode(r));
  return best;
}

struct BalancedDecomposition {
  TreeletShape rooted;  ///< the chosen rooted representative
  TreeletShape rest;    ///< T': representative minus the split child
  TreeletShape child;   ///< T'': subtree of the split child
  unsigned beta = 1;    ///< root children whose subtree equals `child`
  unsigned orbit = 1;   ///< nodes whose rooting reproduces `rooted`
};

/// Roots a non-star tree so that one root edge splits it into two parts of at
/// most size-2 nodes each. Among all valid (root, child) pairs the smallest
/// rooted encoding wins, then the smallest child shape.
inline BalancedDecomposition balanced_decompose(TreeletShape t) {
  if (is_star(t)) throw TreeletError("stars have no balanced decomposition");
  const int k = t.size;
  auto tree = TreeStructure::decode(t);
  std::optional<BalancedDecomposition> best;
  for (int u = 0; u < k; ++u) {
    const TreeletShape rooted = tree.encode(u);
    for (int v : tree.adj[u]) {
      const int s = tree.subtree_size(v, u);
      if (s < 2 || k - s < 2) continue;
      const TreeletShape child = tree.encode_from(v, u);
      if (best && std::tie(best->rooted, best->child) <= std::tie(rooted, child)) continue;
      BalancedDecomposition d;
      d.rooted = rooted;
      d.child = child;
      // Remove one copy of `child` from the root's canonical child list.
      auto kids = root_children(rooted);
      auto pos = std::find(kids.begin(), kids.end(), child);
      d.beta = static_cast<unsigned>(std::count(kids.begin(), kids.end(), child));
      kids.erase(pos);
      TreeletShape rest{1, 0};
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
        const unsigned clen = it->length();
        rest.bits = ((((1u << clen) | it->bits) << 1) << rest.length()) | rest.bits;
        rest.size = static_cast<std::uint8_t>(rest.size + it->size);
      }
      d.rest = rest;
      best = d;
    }
  }
  unsigned orbit = 0;
  for (int r = 0; r < k; ++r)
    if (tree.encode(r) == best->rooted) ++orbit;
  best->orbit = orbit;
  return *best;
}

/// All rooted shapes on 1..k nodes, sorted by (size, bits), generated by
/// closure under merge starting from the single node.
inline std::vector<TreeletShape> enumerate_shapes(unsigned k) {
  if (k < 1 || k > kMaxK) throw TreeletError("k must be in [1, 16]");
  std::vector<std::vector<TreeletShape>> by_size(k + 1);
  by_size[1].push_back(singleton_shape());
  for (unsigned h = 2; h <= k; ++h) {
    std::vector<TreeletShape> level;
    for (unsigned h1 = 1; h1 < h; ++h1)
      for (const auto& a : by_size[h1])
        for (const auto& b : by_size[h - h1])
          if (auto m = merge_shapes(a, b)) level.push_back(*m);
    std::sort(level.begin(), level.end());
    level.erase(std::unique(level.begin(), level.end()), level.end());
    by_size[h] = std::move(level);
  }
  std::vector<TreeletShape> out;
  for (auto& level : by_size) out.insert(out.end(), level.begin(), level.end());
  return out;
}

/// All colorful rooted treelets on at most k nodes over colors [k], sorted by
/// the total order.
inline std::vector<ColoredTreelet> enumerate_colored(unsigned k) {
  auto shapes = enumerate_shapes(k);
  std::vector<ColoredTreelet> out;
  for (const auto& s : shapes)
    for (unsigned cs = 1; cs < (1u << k); ++cs)
      if (static_cast<unsigned>(std::popcount(cs)) == s.size) out.push_back({s, static_cast<ColorSet>(cs)});
  std::sort(out.begin(), out.end());
  return out;
}

/// Unrooted k-node treelet class, with the data every table layout needs.
struct UnrootedShape {
  TreeletShape canonical;  ///< smallest rooted encoding
  bool star = false;
  std::optional<BalancedDecomposition> balanced;  ///< absent for stars
  unsigned rooted_variants = 0;  ///< number of distinct rooted shapes
};

/// Rooted shapes up to k nodes plus the unrooted k-node classes.
class TreeletUniverse {
 public:
  explicit TreeletUniverse(unsigned k) : k_(k), shapes_(enumerate_shapes(k)) {
    for (std::size_t i = 0; i < shapes_.size(); ++i) shape_index_.emplace(pack(shapes_[i]), static_cast<std::uint32_t>(i));
    std::map<TreeletShape, std::uint32_t> classes;
    for (const auto& s : shapes_) {
      if (s.size != k) continue;
      const auto canon = unrooted_canonical(s);
      auto [it, inserted] = classes.try_emplace(canon, 0);
      (void)it;
      (void)inserted;
    }
    std::uint32_t next = 0;
    for (auto& [canon, id] : classes) {
      id = next++;
      UnrootedShape u;
      u.canonical = canon;
      u.star = is_star(canon);
      if (!u.star) u.balanced = balanced_decompose(canon);
      unrooted_.push_back(u);
    }
    rooted_to_unrooted_.assign(shapes_.size(), kNone);
    for (std::size_t i = 0; i < shapes_.size(); ++i) {
      if (shapes_[i].size != k) continue;
      const auto id = classes.at(unrooted_canonical(shapes_[i]));
      rooted_to_unrooted_[i] = id;
      ++unrooted_[id].rooted_variants;
    }
  }

  static constexpr std::uint32_t kNone = UINT32_MAX;

  unsigned k() const { return k_; }
  const std::vector<TreeletShape>& shapes() const { return shapes_; }
  const std::vector<UnrootedShape>& unrooted() const { return unrooted_; }

  std::uint32_t shape_id(TreeletShape s) const {
    auto it = shape_index_.find(pack(s));
    if (it == shape_index_.end()) throw TreeletError("unknown shape " + s.to_string());
    return it->second;
  }
  /// Unrooted class of a rooted k-node shape.
  std::uint32_t unrooted_id(TreeletShape s) const { return rooted_to_unrooted_[shape_id(s)]; }

  std::optional<std::uint32_t> star_id() const {
    for (std::uint32_t j = 0; j < unrooted_.size(); ++j)
      if (unrooted_[j].star) return j;
    return std::nullopt;
  }

 private:
  static std::uint64_t pack(TreeletShape s) { return (static_cast<std::uint64_t>(s.size) << 32) | s.bits; }

  unsigned k_;
  std::vector<TreeletShape> shapes_;
  std::unordered_map<std::uint64_t, std::uint32_t> shape_index_;
  std::vector<UnrootedShape> unrooted_;
  std::vector<std::uint32_t> rooted_to_unrooted_;
};

}  // namespace motifcc
