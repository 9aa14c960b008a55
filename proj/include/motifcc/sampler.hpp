#pragma once

// Uniform sampling of colorful treelet copies from count tables, plus the
// uncolored star sampler and the star/table mixture.

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "alias.hpp"
#include "algebra.hpp"
#include "buildup.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "table.hpp"

namespace motifcc {

/// Raised when a sampler has nothing to draw from.
class EmptyPoolError : public std::runtime_error {
 public:
  EmptyPoolError() : std::runtime_error("none exist") {}
  using std::runtime_error::runtime_error;
};

/// The rounds of one build, loaded for sampling.
template <CountType C>
class TableSet {
 public:
  explicit TableSet(unsigned k) : k_(k), rounds_(k + 1) {}

  static TableSet load_directory(const std::string& dir, unsigned k) {
    TableSet set(k);
    for (unsigned h = 1; h <= k; ++h) {
      const auto path = round_path(dir, h);
      if (!std::filesystem::exists(path)) continue;
      MappedRound<C> mapped(path);
      if (mapped.header().k != k || mapped.header().h != h) throw FormatError("table header does not match " + path);
      set.rounds_[h] = CountTable<C>::load(mapped);
    }
    if (!set.has(k)) throw IoError("missing final round table in " + dir);
    return set;
  }

  static TableSet from_store(const MemoryStore<C>& store, unsigned k) {
    TableSet set(k);
    for (unsigned h = 1; h <= k; ++h)
      if (store.has(h)) set.rounds_[h] = CountTable<C>::load(store.round(h));
    return set;
  }

  unsigned k() const { return k_; }
  bool has(unsigned h) const { return h < rounds_.size() && rounds_[h].has_value(); }
  const CountTable<C>& round(unsigned h) const {
    if (!has(h)) throw std::out_of_range("round " + std::to_string(h) + " not available");
    return *rounds_[h];
  }
  const TableHeader& header() const { return round(k_).header(); }
  bool skip_round() const { return header().has(kFlagRoundSkipped); }

 private:
  unsigned k_;
  std::vector<std::optional<CountTable<C>>> rounds_;
};

struct SamplerOptions {
  /// Nodes with at least this degree draw neighbors from a buffer.
  std::size_t delta0 = 4096;
  /// Buffer size B; 0 disables buffering.
  std::size_t buffer = 1024;
};

struct SampledCopy {
  std::vector<NodeId> nodes;  ///< nodes[0] is the root
  std::vector<std::pair<NodeId, NodeId>> edges;
  bool star = false;
};

/// Shared, read-only sampling state over one table set. Draws go through a
/// Session, which owns the per-worker neighbor buffers.
template <CountType C, typename Algebra>
class TreeletSampler {
 public:
  TreeletSampler(const ColoredGraph& g, const Algebra& alg, const TableSet<C>& tables, SamplerOptions opt = {})
      : g_(g), alg_(alg), tables_(tables), opt_(opt), k_(tables.k()) {
    if (alg.k() != k_) throw std::invalid_argument("algebra and tables disagree on k");
    if (g.num_nodes() != tables.header().n) throw std::invalid_argument("graph and tables disagree on n");
    const auto& final_round = tables.round(k_);
    std::vector<C> eta(g.num_nodes());
    bool any = false;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      eta[v] = final_round.occ(v);
      any = any || !count_traits<C>::is_zero(eta[v]);
    }
    if (any) roots_ = AliasTable(eta);
    const auto& universe = alg.universe();
    multiplicity_.assign(universe.unrooted().size(), 1);
    for (const auto& s : tables.header().shapes) multiplicity_[universe.unrooted_id(s.canonical)] = s.multiplicity;
    min_multiplicity_ = 0;
    for (const auto& s : tables.header().shapes)
      if (!s.copies.is_zero()) min_multiplicity_ = min_multiplicity_ == 0 ? s.multiplicity : std::min(min_multiplicity_, s.multiplicity);
    class_index_.resize(universe.unrooted().size());
    class_once_ = std::make_unique<std::once_flag[]>(universe.unrooted().size());
  }

  const ColoredGraph& graph() const { return g_; }
  const Algebra& algebra() const { return alg_; }
  const TableSet<C>& tables() const { return tables_; }
  bool empty() const { return roots_.size() == 0; }
  bool class_empty(std::uint32_t j) const { return index_for(j).roots.size() == 0; }

  class Session {
   public:
    explicit Session(const TreeletSampler& s) : s_(&s) {}

    /// One copy drawn uniformly from all colorful k-treelet copies in the
    /// table (non-star copies when round 'k-1' was skipped).
    SampledCopy sample(Rng& rng) {
      if (s_->empty()) throw EmptyPoolError();
      const auto& final_round = s_->tables_.round(s_->k_);
      for (;;) {
        const auto v = static_cast<NodeId>(s_->roots_(rng));
        const C x = count_traits<C>::add(rng.below_count<C>(final_round.occ(v)), C(1));
        const auto idx = final_round.entry_at_rank(v, x);
        const TreeletKey key = final_round.keys(v)[idx];
        // Each copy is stored once per rooting in its class's orbit; thin
        // the classes stored more often so every copy is equally likely.
        const unsigned mult = s_->multiplicity_[s_->alg_.unrooted_of(key)];
        if (mult != s_->min_multiplicity_ && rng.below(mult) >= s_->min_multiplicity_) continue;
        return expand_root(key, v, rng);
      }
    }

    /// One copy drawn uniformly from the copies of unrooted class j.
    SampledCopy sample_class(std::uint32_t j, Rng& rng) {
      const auto& idx = s_->index_for(j);
      if (idx.roots.size() == 0) throw EmptyPoolError();
      const auto slot = idx.roots(rng);
      const auto begin = idx.offsets[slot], end = idx.offsets[slot + 1];
      const C x = count_traits<C>::add(rng.below_count<C>(idx.cumulative[end - 1]), C(1));
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(idx.cumulative.begin() + static_cast<std::ptrdiff_t>(begin), idx.cumulative.begin() + static_cast<std::ptrdiff_t>(end), x) -
          idx.cumulative.begin());
      return expand_root(idx.keys[pos], idx.nodes[slot], rng);
    }

   private:
    struct Choice {
      NodeId u;
      ColorSet child_colors;
    };
    struct Buffer {
      std::vector<Choice> items;
      std::size_t next = 0;
    };

    SampledCopy expand_root(TreeletKey key, NodeId v, Rng& rng) {
      SampledCopy out;
      out.nodes.push_back(v);
      expand(key, v, s_->tables_.skip_round(), out, rng);
      return out;
    }

    void expand(TreeletKey key, NodeId v, bool balanced, SampledCopy& out, Rng& rng) {
      if (s_->alg_.size(key) == 1) return;
      const auto [rest, child] = parts(key, balanced);
      const ColorSet colors = s_->alg_.colors(key);
      const Choice c = choose(key, v, colors, rest, child, balanced, rng);
      out.nodes.push_back(c.u);
      out.edges.emplace_back(v, c.u);
      expand(find(rest, static_cast<ColorSet>(colors & ~c.child_colors)), v, false, out, rng);
      expand(find(child, c.child_colors), c.u, false, out, rng);
    }

    std::pair<TreeletShape, TreeletShape> parts(TreeletKey key, bool balanced) const {
      if (balanced && s_->alg_.size(key) == s_->k_) {
        const auto rep = s_->alg_.representative(key);
        return {rep.rest, rep.child};
      }
      return s_->alg_.canonical_parts(key);
    }

    TreeletKey find(TreeletShape shape, ColorSet colors) const {
      auto key = s_->alg_.find(shape, colors);
      if (!key) throw std::logic_error("treelet part not representable");
      return *key;
    }

    /// All (u, C'') with their weights c(T', C \ C'', v) * c(T'', C'', u).
    C candidates(NodeId v, ColorSet colors, TreeletShape rest, TreeletShape child, std::vector<Choice>& out,
                 std::vector<C>& weights) const {
      out.clear();
      weights.clear();
      const auto& g = s_->g_;
      const auto& rest_round = s_->tables_.round(rest.size);
      const auto& child_round = s_->tables_.round(child.size);
      const ColorSet root_bit = static_cast<ColorSet>(1u << g.color(v));
      const ColorSet avail = static_cast<ColorSet>(colors & ~root_bit);
      C total{};
      for (ColorSet sub = avail;; sub = static_cast<ColorSet>((sub - 1) & avail)) {
        if (static_cast<unsigned>(std::popcount(static_cast<unsigned>(sub))) == child.size) {
          const C a = rest_round.occ(find(rest, static_cast<ColorSet>(colors & ~sub)), v);
          if (!count_traits<C>::is_zero(a)) {
            const TreeletKey child_key = find(child, sub);
            for (NodeId u : g.neighbors(v)) {
              if (!((sub >> g.color(u)) & 1u)) continue;
              const C b = child_round.occ(child_key, u);
              if (count_traits<C>::is_zero(b)) continue;
              const C w = count_traits<C>::mul(a, b);
              out.push_back({u, sub});
              weights.push_back(w);
              total = count_traits<C>::add(total, w);
            }
          }
        }
        if (sub == 0) break;
      }
      if (count_traits<C>::is_zero(total)) throw std::logic_error("table entry has no decomposition");
      return total;
    }

    Choice choose(TreeletKey key, NodeId v, ColorSet colors, TreeletShape rest, TreeletShape child, bool balanced, Rng& rng) {
      const bool buffered = s_->opt_.buffer > 0 && s_->g_.degree(v) >= s_->opt_.delta0;
      if (!buffered) {
        const C total = candidates(v, colors, rest, child, choices_, weights_);
        C x = rng.below_count<C>(total);
        for (std::size_t i = 0; i < choices_.size(); ++i) {
          if (x < weights_[i]) return choices_[i];
          x -= weights_[i];
        }
        throw std::logic_error("weighted draw ran past the end");
      }
      auto& buf = buffers_[{v, key, balanced}];
      if (buf.next == buf.items.size()) refill(buf, v, colors, rest, child, rng);
      return buf.items[buf.next++];
    }

    /// B independent exact draws from one sweep over v's candidates, in
    /// random order.
    void refill(Buffer& buf, NodeId v, ColorSet colors, TreeletShape rest, TreeletShape child, Rng& rng) {
      const C total = candidates(v, colors, rest, child, choices_, weights_);
      const std::size_t b = s_->opt_.buffer;
      std::vector<C> xs(b);
      for (auto& x : xs) x = rng.below_count<C>(total);
      std::sort(xs.begin(), xs.end());
      buf.items.clear();
      C cum{};
      std::size_t i = 0;
      for (const auto& x : xs) {
        while (!(x < count_traits<C>::add(cum, weights_[i]))) cum = count_traits<C>::add(cum, weights_[i++]);
        buf.items.push_back(choices_[i]);
      }
      for (std::size_t j = buf.items.size(); j > 1; --j) std::swap(buf.items[j - 1], buf.items[rng.below(j)]);
      buf.next = 0;
    }

    const TreeletSampler* s_;
    std::map<std::tuple<NodeId, TreeletKey, bool>, Buffer> buffers_;
    std::vector<Choice> choices_;
    std::vector<C> weights_;
  };

 private:
  struct ClassIndex {
    std::vector<NodeId> nodes;
    std::vector<std::size_t> offsets;
    std::vector<TreeletKey> keys;
    std::vector<C> cumulative;
    AliasTable roots;
  };

  const ClassIndex& index_for(std::uint32_t j) const {
    if (j >= class_index_.size()) throw std::out_of_range("unknown treelet class");
    std::call_once(class_once_[j], [&] {
      ClassIndex idx;
      const auto& final_round = tables_.round(k_);
      std::vector<C> totals;
      idx.offsets.push_back(0);
      for (NodeId v = 0; v < g_.num_nodes(); ++v) {
        auto keys = final_round.keys(v);
        C cum{};
        for (std::size_t i = 0; i < keys.size(); ++i) {
          if (alg_.unrooted_of(keys[i]) != j) continue;
          cum = count_traits<C>::add(cum, final_round.count_at(v, i));
          idx.keys.push_back(keys[i]);
          idx.cumulative.push_back(cum);
        }
        if (!count_traits<C>::is_zero(cum)) {
          idx.nodes.push_back(v);
          idx.offsets.push_back(idx.keys.size());
          totals.push_back(cum);
        }
      }
      if (!totals.empty()) idx.roots = AliasTable(totals);
      class_index_[j] = std::move(idx);
    });
    return class_index_[j];
  }

  const ColoredGraph& g_;
  const Algebra& alg_;
  const TableSet<C>& tables_;
  SamplerOptions opt_;
  unsigned k_;
  AliasTable roots_;
  std::vector<unsigned> multiplicity_;
  unsigned min_multiplicity_ = 0;
  mutable std::vector<ClassIndex> class_index_;
  std::unique_ptr<std::once_flag[]> class_once_;
};

/// Uniform sampler over the uncolored k-stars of g.
class StarSampler {
 public:
  StarSampler(const ColoredGraph& g, unsigned k) : g_(g), k_(k) {
    if (k < 2) throw std::invalid_argument("k must be at least 2");
    std::vector<U256> w(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      w[v] = binomial(g.degree(v), k - 1);
      total_ = count_traits<U256>::add(total_, w[v]);
    }
    if (!total_.is_zero()) centers_ = AliasTable(w);
  }

  bool empty() const { return total_.is_zero(); }
  const U256& total() const { return total_; }

  /// Center, then k-1 distinct neighbors uniformly (Floyd's method).
  SampledCopy sample(Rng& rng) const {
    if (empty()) throw EmptyPoolError();
    const auto v = static_cast<NodeId>(centers_(rng));
    const auto nbrs = g_.neighbors(v);
    const std::size_t d = nbrs.size(), m = k_ - 1;
    std::vector<std::size_t> picked;
    for (std::size_t j = d - m; j < d; ++j) {
      const auto t = static_cast<std::size_t>(rng.below(j + 1));
      picked.push_back(std::find(picked.begin(), picked.end(), t) == picked.end() ? t : j);
    }
    SampledCopy out;
    out.star = true;
    out.nodes.push_back(v);
    for (auto i : picked) {
      out.nodes.push_back(nbrs[i]);
      out.edges.emplace_back(v, nbrs[i]);
    }
    return out;
  }

 private:
  const ColoredGraph& g_;
  unsigned k_;
  U256 total_ = 0;
  AliasTable centers_;
};

/// Star branch probability of the mixture: P*S / (P*S + t), where P is the
/// probability that a fixed k-set is colorful and t counts the table's
/// colorful copies. Zero unless stars were left out of the table.
inline long double star_branch_probability(const TableHeader& header, long double colorful_probability) {
  if (!header.has(kFlagRoundSkipped)) return 0.0L;
  const long double ps = colorful_probability * count_traits<U256>::to_ld(header.star_total);
  const long double t = count_traits<U256>::to_ld(header.total);
  if (ps + t == 0.0L) return 0.0L;
  return ps / (ps + t);
}

/// Graphlet sampler over the mixture of the star pool and the table pool.
template <CountType C, typename Algebra>
class GraphletMixture {
 public:
  GraphletMixture(const TreeletSampler<C, Algebra>& treelets, const StarSampler& stars, long double colorful_probability)
      : session_(treelets), treelets_(&treelets), stars_(&stars) {
    const auto& header = treelets.tables().header();
    star_probability_ = star_branch_probability(header, colorful_probability);
    if (stars.empty()) star_probability_ = 0.0L;
    if (treelets.empty() && star_probability_ > 0.0L) star_probability_ = 1.0L;
  }

  long double star_probability() const { return star_probability_; }

  SampledCopy sample(Rng& rng) {
    const bool star = star_probability_ >= 1.0L || (star_probability_ > 0.0L && rng.unit() < star_probability_);
    if (star) return stars_->sample(rng);
    if (treelets_->empty()) throw EmptyPoolError();
    return session_.sample(rng);
  }

 private:
  typename TreeletSampler<C, Algebra>::Session session_;
  const TreeletSampler<C, Algebra>* treelets_;
  const StarSampler* stars_;
  long double star_probability_ = 0.0L;
};

}  // namespace motifcc
