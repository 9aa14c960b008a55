#pragma once

// Host graph in compressed sparse rows, plus one color per node.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace motifcc {

using NodeId = std::uint32_t;
using Color = std::uint8_t;

inline constexpr unsigned kMaxK = 16;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ColoredGraph {
 public:
  ColoredGraph() = default;

  /// Builds from an edge list over dense ids [0, n). Self-loops and
  /// duplicates are dropped; direction is ignored.
  static ColoredGraph from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges) {
    ColoredGraph g;
    std::vector<std::uint64_t> degree(n + 1, 0);
    for (auto [a, b] : edges) {
      if (a >= n || b >= n) throw std::out_of_range("edge endpoint out of range");
      if (a == b) continue;
      ++degree[a];
      ++degree[b];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
    std::vector<NodeId> adj(g.offsets_[n]);
    std::vector<std::uint64_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [a, b] : edges) {
      if (a == b) continue;
      adj[fill[a]++] = b;
      adj[fill[b]++] = a;
    }
    // Sort and dedupe each row, then compact.
    std::vector<std::uint64_t> new_offsets(n + 1, 0);
    std::size_t out = 0;
    for (std::size_t v = 0; v < n; ++v) {
      auto first = adj.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
      auto last = adj.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
      std::sort(first, last);
      auto uend = std::unique(first, last);
      for (auto it = first; it != uend; ++it) adj[out++] = *it;
      new_offsets[v + 1] = out;
    }
    adj.resize(out);
    g.offsets_ = std::move(new_offsets);
    g.adj_ = std::move(adj);
    g.finish();
    return g;
  }

  /// Builds directly from CSR arrays; validates symmetry and sortedness.
  static ColoredGraph from_csr(std::vector<std::uint64_t> offsets, std::vector<NodeId> adj) {
    ColoredGraph g;
    g.offsets_ = std::move(offsets);
    g.adj_ = std::move(adj);
    if (g.offsets_.empty() || g.offsets_.front() != 0 || g.offsets_.back() != g.adj_.size())
      throw IoError("corrupt CSR offsets");
    const std::size_t n = g.offsets_.size() - 1;
    for (std::size_t v = 0; v < n; ++v) {
      if (g.offsets_[v] > g.offsets_[v + 1]) throw IoError("corrupt CSR offsets");
      auto nb = g.neighbors(static_cast<NodeId>(v));
      for (std::size_t i = 0; i < nb.size(); ++i) {
        if (nb[i] >= n || nb[i] == v) throw IoError("corrupt CSR adjacency");
        if (i > 0 && nb[i - 1] >= nb[i]) throw IoError("CSR rows must be strictly increasing");
      }
    }
    for (std::size_t v = 0; v < n; ++v)
      for (NodeId u : g.neighbors(static_cast<NodeId>(v)))
        if (!g.adjacent(u, static_cast<NodeId>(v))) throw IoError("CSR adjacency is not symmetric");
    g.finish();
    return g;
  }

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return adj_.size() / 2; }
  std::size_t max_degree() const { return max_degree_; }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  bool adjacent(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  const std::vector<std::uint64_t>& offsets() const { return offsets_; }
  const std::vector<NodeId>& adjacency() const { return adj_; }

  // Coloring.
  unsigned k() const { return k_; }
  bool colored() const { return !colors_.empty(); }
  Color color(NodeId v) const { return colors_[v]; }
  std::span<const Color> colors() const { return colors_; }
  void set_colors(unsigned k, std::vector<Color> colors) {
    if (colors.size() != num_nodes()) throw std::invalid_argument("one color per node required");
    for (Color c : colors)
      if (c >= k) throw std::invalid_argument("color out of range");
    k_ = k;
    colors_ = std::move(colors);
  }

  /// Original node labels, in dense-id order (empty if ids were already dense).
  const std::vector<std::uint64_t>& original_ids() const { return original_ids_; }
  void set_original_ids(std::vector<std::uint64_t> ids) { original_ids_ = std::move(ids); }

  /// FNV-1a over the CSR arrays; identifies graph content in manifests.
  std::uint64_t content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void* p, std::size_t len) {
      auto bytes = static_cast<const unsigned char*>(p);
      for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
      }
    };
    const std::uint64_t n = num_nodes();
    feed(&n, sizeof n);
    feed(offsets_.data(), offsets_.size() * sizeof(std::uint64_t));
    feed(adj_.data(), adj_.size() * sizeof(NodeId));
    return h;
  }

 private:
  void finish() {
    max_degree_ = 0;
    for (std::size_t v = 0; v + 1 < offsets_.size(); ++v)
      max_degree_ = std::max<std::size_t>(max_degree_, offsets_[v + 1] - offsets_[v]);
  }

  std::vector<std::uint64_t> offsets_;
  std::vector<NodeId> adj_;
  std::size_t max_degree_ = 0;
  unsigned k_ = 0;
  std::vector<Color> colors_;
  std::vector<std::uint64_t> original_ids_;
};

/// Parses a whitespace-separated edge list. Ids are remapped to 0..n-1 in
/// first-appearance order; '#' and '%' start comment lines.
inline ColoredGraph load_edge_list(std::istream& in) {
  std::unordered_map<std::uint64_t, NodeId> remap;
  std::vector<std::uint64_t> original;
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto intern = [&](std::uint64_t id) {
    auto [it, inserted] = remap.try_emplace(id, static_cast<NodeId>(original.size()));
    if (inserted) {
      if (original.size() >= UINT32_MAX) throw CapacityError("too many nodes");
      original.push_back(id);
    }
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    auto skip_ws = [&sv] {
      while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '\r')) sv.remove_prefix(1);
    };
    skip_ws();
    if (sv.empty() || sv.front() == '#' || sv.front() == '%') continue;
    std::uint64_t ids[2];
    for (auto& id : ids) {
      skip_ws();
      if (sv.empty()) throw ParseError(lineno, "expected two node ids");
      auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), id);
      if (ec != std::errc{} || (ptr != sv.data() + sv.size() && *ptr != ' ' && *ptr != '\t' && *ptr != '\r'))
        throw ParseError(lineno, "malformed node id");
      sv.remove_prefix(static_cast<std::size_t>(ptr - sv.data()));
    }
    skip_ws();
    if (!sv.empty()) throw ParseError(lineno, "trailing tokens after edge");
    NodeId a = intern(ids[0]);
    NodeId b = intern(ids[1]);
    edges.emplace_back(a, b);
  }
  if (original.empty()) throw ParseError(lineno, "empty graph");
  auto g = ColoredGraph::from_edges(original.size(), edges);
  g.set_original_ids(std::move(original));
  return g;
}

inline ColoredGraph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return load_edge_list(in);
}

// Binary normalized-graph cache: "GFG1", n, m (u64 LE), offsets (n+1 x u64),
// neighbor ids (2m x u32).
namespace detail {
template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(v & 0xff);
    if constexpr (sizeof(T) > 1) v >>= 8;
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}
template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError("truncated file");
  T v = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    if constexpr (sizeof(T) > 1) v <<= 8;
    v |= buf[i];
  }
  return v;
}
}  // namespace detail

inline void write_graph_cache(const ColoredGraph& g, std::ostream& out) {
  out.write("GFG1", 4);
  detail::write_le<std::uint64_t>(out, g.num_nodes());
  detail::write_le<std::uint64_t>(out, g.num_edges());
  for (auto off : g.offsets()) detail::write_le<std::uint64_t>(out, off);
  for (auto u : g.adjacency()) detail::write_le<std::uint32_t>(out, u);
  if (!out) throw IoError("graph cache write failed");
}

inline ColoredGraph read_graph_cache(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "GFG1", 4) != 0) throw IoError("not a GFG1 graph cache");
  const auto n = detail::read_le<std::uint64_t>(in);
  const auto m = detail::read_le<std::uint64_t>(in);
  std::vector<std::uint64_t> offsets(n + 1);
  for (auto& off : offsets) off = detail::read_le<std::uint64_t>(in);
  std::vector<NodeId> adj(2 * m);
  for (auto& u : adj) u = detail::read_le<std::uint32_t>(in);
  return ColoredGraph::from_csr(std::move(offsets), std::move(adj));
}

/// Loads either a GFG1 cache or a text edge list, by sniffing the magic.
inline ColoredGraph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(magic, "GFG1", 4) == 0) return read_graph_cache(in);
  return load_edge_list(in);
}

/// Colors every node independently and uniformly in [k].
inline void color_uniform(ColoredGraph& g, unsigned k, std::uint64_t seed) {
  if (k < 2 || k > kMaxK) throw std::invalid_argument("k must be in [2, 16]");
  Rng rng(seed, 0xc0102);
  std::vector<Color> colors(g.num_nodes());
  for (auto& c : colors) c = static_cast<Color>(rng.below(k));
  g.set_colors(k, std::move(colors));
}

/// Skewed coloring: each color in 1..k-1 with probability lambda, color 0
/// with probability 1 - lambda (k - 1).
inline void color_biased(ColoredGraph& g, unsigned k, double lambda, std::uint64_t seed) {
  if (k < 2 || k > kMaxK) throw std::invalid_argument("k must be in [2, 16]");
  if (!(lambda > 0.0) || !(lambda < 1.0 / (k - 1)))
    throw std::invalid_argument("lambda must satisfy 0 < lambda < 1/(k-1)");
  Rng rng(seed, 0xc0103);
  const double nonzero = lambda * (k - 1);
  std::vector<Color> colors(g.num_nodes());
  for (auto& c : colors) {
    const double u = rng.unit();
    if (u < nonzero) {
      auto idx = static_cast<unsigned>(u / lambda);
      c = static_cast<Color>(1 + std::min(idx, k - 2));
    } else {
      c = 0;
    }
  }
  g.set_colors(k, std::move(colors));
}

}  // namespace motifcc
