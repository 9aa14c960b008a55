#pragma once

// Small k-node graphs (k <= 16): induced-subgraph extraction, canonical
// signatures, class census, spanning-tree counts.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <set>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "count.hpp"
#include "graph.hpp"

namespace motifcc {

/// Adjacency of a graph on at most 16 nodes as one bitmask per node.
struct SmallGraph {
  unsigned k = 0;
  std::array<std::uint16_t, kMaxK> adj{};

  bool edge(unsigned i, unsigned j) const { return (adj[i] >> j) & 1u; }
  void add_edge(unsigned i, unsigned j) {
    adj[i] |= static_cast<std::uint16_t>(1u << j);
    adj[j] |= static_cast<std::uint16_t>(1u << i);
  }
  unsigned degree(unsigned i) const { return static_cast<unsigned>(std::popcount(adj[i])); }
  unsigned num_edges() const {
    unsigned m = 0;
    for (unsigned i = 0; i < k; ++i) m += degree(i);
    return m / 2;
  }

  bool connected() const {
    if (k == 0) return false;
    std::uint32_t seen = 1, frontier = 1;
    while (frontier) {
      std::uint32_t next = 0;
      for (unsigned i = 0; i < k; ++i)
        if ((frontier >> i) & 1u) next |= adj[i];
      frontier = next & ~seen;
      seen |= next;
    }
    return seen == (k == 32 ? ~0u : (1u << k) - 1);
  }

  /// Upper triangle in row order, the pair (0,1) in the most significant of
  /// the k(k-1)/2 used bits.
  u128 pack() const {
    u128 code = 0;
    for (unsigned i = 0; i < k; ++i)
      for (unsigned j = i + 1; j < k; ++j) code = (code << 1) | static_cast<u128>(edge(i, j));
    return code;
  }
  static SmallGraph unpack(unsigned k, u128 code) {
    SmallGraph g;
    g.k = k;
    int bit = static_cast<int>(k * (k - 1) / 2) - 1;
    for (unsigned i = 0; i < k; ++i)
      for (unsigned j = i + 1; j < k; ++j, --bit)
        if ((code >> bit) & 1u) g.add_edge(i, j);
    return g;
  }
  /// Relabels node i as perm[i].
  SmallGraph permuted(std::span<const unsigned> perm) const {
    SmallGraph g;
    g.k = k;
    for (unsigned i = 0; i < k; ++i)
      for (unsigned j = i + 1; j < k; ++j)
        if (edge(i, j)) g.add_edge(perm[i], perm[j]);
    return g;
  }
};

/// Induced subgraph of g on `nodes`, node i of the result being nodes[i].
inline SmallGraph extract_induced(const ColoredGraph& g, std::span<const NodeId> nodes) {
  if (nodes.size() > kMaxK) throw std::invalid_argument("at most 16 nodes");
  SmallGraph s;
  s.k = static_cast<unsigned>(nodes.size());
  for (unsigned i = 0; i < s.k; ++i)
    for (unsigned j = i + 1; j < s.k; ++j) {
      if (nodes[i] == nodes[j]) throw std::invalid_argument("duplicate node id in graphlet");
      if (g.adjacent(nodes[i], nodes[j])) s.add_edge(i, j);
    }
  return s;
}

struct GraphletSignature {
  std::uint8_t k = 0;
  u128 code = 0;

  auto operator<=>(const GraphletSignature&) const = default;
  bool operator==(const GraphletSignature&) const = default;

  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s(32, '0');
    u128 c = code;
    for (int i = 31; i >= 0; --i, c >>= 4) s[i] = digits[static_cast<unsigned>(c & 0xf)];
    return s;
  }
  static GraphletSignature from_hex(unsigned k, const std::string& hex) {
    if (hex.size() != 32) throw std::invalid_argument("signature must be 32 hex characters");
    GraphletSignature sig;
    sig.k = static_cast<std::uint8_t>(k);
    for (char ch : hex) {
      unsigned d;
      if (ch >= '0' && ch <= '9')
        d = ch - '0';
      else if (ch >= 'a' && ch <= 'f')
        d = ch - 'a' + 10;
      else if (ch >= 'A' && ch <= 'F')
        d = ch - 'A' + 10;
      else
        throw std::invalid_argument("bad hex digit in signature");
      sig.code = (sig.code << 4) | d;
    }
    return sig;
  }
  SmallGraph graph() const { return SmallGraph::unpack(k, code); }
};

struct GraphletSignatureHash {
  std::size_t operator()(const GraphletSignature& s) const {
    const auto lo = static_cast<std::uint64_t>(s.code), hi = static_cast<std::uint64_t>(s.code >> 64);
    return std::hash<std::uint64_t>{}(lo ^ (hi * 0x9e3779b97f4a7c15ULL) ^ s.k);
  }
};

namespace detail {

using Cells = std::vector<std::vector<unsigned>>;

/// Splits cells by neighbor counts into every cell until stable. Cells keep
/// their relative order and sub-cells are ordered by count vector, so the
/// result commutes with relabeling.
inline void refine(const SmallGraph& g, Cells& cells) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::uint16_t> masks(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      for (unsigned v : cells[c]) masks[c] |= static_cast<std::uint16_t>(1u << v);
    for (std::size_t c = 0; c < cells.size() && !changed; ++c) {
      if (cells[c].size() == 1) continue;
      std::vector<std::pair<std::vector<unsigned>, unsigned>> keyed;
      for (unsigned v : cells[c]) {
        std::vector<unsigned> sig(cells.size());
        for (std::size_t d = 0; d < cells.size(); ++d) sig[d] = std::popcount(static_cast<unsigned>(g.adj[v] & masks[d]));
        keyed.emplace_back(std::move(sig), v);
      }
      std::sort(keyed.begin(), keyed.end());
      if (keyed.front().first == keyed.back().first) continue;
      Cells split;
      for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (i == 0 || keyed[i].first != keyed[i - 1].first) split.emplace_back();
        split.back().push_back(keyed[i].second);
      }
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(c));
      cells.insert(cells.begin() + static_cast<std::ptrdiff_t>(c), split.begin(), split.end());
      changed = true;
    }
  }
}

inline void canonical_search(const SmallGraph& g, Cells cells, u128& best, bool& have) {
  refine(g, cells);
  auto it = std::find_if(cells.begin(), cells.end(), [](const auto& c) { return c.size() > 1; });
  if (it == cells.end()) {
    std::array<unsigned, kMaxK> perm{};
    for (unsigned pos = 0; pos < cells.size(); ++pos) perm[cells[pos][0]] = pos;
    const u128 code = g.permuted(std::span<const unsigned>(perm.data(), g.k)).pack();
    if (!have || code > best) best = code, have = true;
    return;
  }
  const auto c = static_cast<std::size_t>(it - cells.begin());
  const auto cell = cells[c];
  std::vector<unsigned> tried;
  for (unsigned v : cell) {
    // Swapping twins is an automorphism fixing the current partition.
    bool twin = false;
    for (unsigned w : tried) {
      const auto bv = static_cast<std::uint16_t>(1u << v), bw = static_cast<std::uint16_t>(1u << w);
      if ((g.adj[v] & ~bw) == (g.adj[w] & ~bv)) {
        twin = true;
        break;
      }
    }
    if (twin) continue;
    tried.push_back(v);
    Cells next(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(c));
    next.push_back({v});
    std::vector<unsigned> rest;
    for (unsigned w : cell)
      if (w != v) rest.push_back(w);
    next.push_back(std::move(rest));
    next.insert(next.end(), cells.begin() + static_cast<std::ptrdiff_t>(c) + 1, cells.end());
    canonical_search(g, std::move(next), best, have);
  }
}

}  // namespace detail

/// Canonical form: the largest packed adjacency over the labelings reached by
/// individualization and refinement, starting from the degree partition.
inline GraphletSignature canonical_signature(const SmallGraph& g) {
  if (g.k > kMaxK) throw std::invalid_argument("k must be at most 16");
  GraphletSignature sig;
  sig.k = static_cast<std::uint8_t>(g.k);
  if (g.k <= 1) return sig;
  detail::Cells cells(1);
  for (unsigned v = 0; v < g.k; ++v) cells[0].push_back(v);
  bool have = false;
  detail::canonical_search(g, std::move(cells), sig.code, have);
  return sig;
}

/// Memo cache keyed by the raw packed adjacency. Safe for concurrent use.
class SignatureCache {
 public:
  GraphletSignature get(const SmallGraph& g) {
    const Key key{g.k, g.pack()};
    {
      std::shared_lock lock(mu_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    const auto sig = canonical_signature(g);
    std::unique_lock lock(mu_);
    map_.insert_or_assign(key, sig);
    return sig;
  }
  std::size_t size() const {
    std::shared_lock lock(mu_);
    return map_.size();
  }

 private:
  struct Key {
    unsigned k;
    u128 raw;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& key) const { return GraphletSignatureHash{}({static_cast<std::uint8_t>(key.k), key.raw}); }
  };
  mutable std::shared_mutex mu_;
  std::unordered_map<Key, GraphletSignature, KeyHash> map_;
};

/// Signatures of all connected k-node graphs, sorted. Built by extending each
/// (k-1)-node class with a new node joined to a non-empty subset, which
/// reaches every class because a connected graph has a non-cut node.
inline std::vector<GraphletSignature> graphlet_classes(unsigned k) {
  if (k < 1 || k > 10) throw std::invalid_argument("class census supports 1 <= k <= 10");
  std::vector<GraphletSignature> level{canonical_signature(SmallGraph{1, {}})};
  for (unsigned n = 2; n <= k; ++n) {
    std::set<GraphletSignature> next;
    for (const auto& sig : level) {
      const auto base = sig.graph();
      for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
        SmallGraph g = base;
        g.k = n;
        for (unsigned i = 0; i + 1 < n; ++i)
          if ((mask >> i) & 1u) g.add_edge(i, n - 1);
        next.insert(canonical_signature(g));
      }
    }
    level.assign(next.begin(), next.end());
  }
  return level;
}

/// Number of spanning trees by the matrix-tree theorem: the determinant of a
/// Laplacian minor by fraction-free (Bareiss) elimination. Zero when the
/// graph is disconnected.
inline std::uint64_t spanning_trees_kirchhoff(const SmallGraph& g) {
  if (g.k <= 1) return g.k;
  const unsigned m = g.k - 1;
  std::array<std::array<__int128, kMaxK>, kMaxK> a{};
  for (unsigned i = 0; i < m; ++i)
    for (unsigned j = 0; j < m; ++j) a[i][j] = i == j ? static_cast<__int128>(g.degree(i + 1)) : -static_cast<__int128>(g.edge(i + 1, j + 1));
  __int128 prev = 1;
  int sign = 1;
  for (unsigned p = 0; p < m; ++p) {
    if (a[p][p] == 0) {
      unsigned r = p + 1;
      while (r < m && a[r][p] == 0) ++r;
      if (r == m) return 0;
      std::swap(a[p], a[r]);
      sign = -sign;
    }
    for (unsigned i = p + 1; i < m; ++i) {
      for (unsigned j = p + 1; j < m; ++j) a[i][j] = (a[i][j] * a[p][p] - a[i][p] * a[p][j]) / prev;
      a[i][p] = 0;
    }
    prev = a[p][p];
  }
  const __int128 det = sign * a[m - 1][m - 1];
  if (det < 0) throw std::logic_error("negative Laplacian minor");
  return static_cast<std::uint64_t>(det);
}

}  // namespace motifcc
