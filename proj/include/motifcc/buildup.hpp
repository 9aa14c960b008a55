#pragma once

// Color-coding dynamic program. Round h holds, for every node v and every
// colorful rooted treelet T on h nodes, the number of colorful copies of T
// rooted at v. Round h is built from rounds 1..h-1 by merging a treelet at v
// with a treelet at a neighbor u, then dividing by beta.

#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_map>
#include <vector>

#include "algebra.hpp"
#include "graph.hpp"
#include "table.hpp"

namespace motifcc {

struct BuildOptions {
  /// Build round k through balanced splits and skip round k-1. Stars are
  /// then counted from degrees instead of stored.
  bool skip_round = false;
  /// Only store final-round treelets rooted at color 0 (canonical build).
  bool zero_root = true;
  /// Variable-length records (needs 11-bit indexed keys).
  bool vlc = false;
  unsigned threads = 1;
  /// Non-zero when the coloring is biased; recorded in every header.
  double lambda = 0.0;

  struct RoundStats {
    unsigned h = 0;
    std::uint64_t entries = 0;
    double seconds = 0.0;
  };
  std::function<void(const RoundStats&)> on_round;
};

/// Rounds that a build stores, in build order.
inline std::vector<unsigned> stored_rounds(unsigned k, bool skip_round) {
  std::vector<unsigned> out;
  const unsigned last = skip_round ? k - 2 : k - 1;
  for (unsigned h = 1; h <= last; ++h) out.push_back(h);
  out.push_back(k);
  return out;
}

/// Number of k-node stars: sum over v of C(deg v, k-1).
inline U256 star_count(const ColoredGraph& g, unsigned k) {
  U256 s = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) s = count_traits<U256>::add(s, binomial(g.degree(v), k - 1));
  return s;
}

/// Rounds kept in memory.
template <CountType C>
class MemoryStore {
 public:
  void open(const TableHeader& header) {
    if (rounds_.size() <= header.h) rounds_.resize(header.h + 1);
    rounds_[header.h] = std::make_unique<MemoryRound<C>>(header);
    current_ = header.h;
  }
  void put(NodeId v, std::vector<Entry<C>>&& entries) { rounds_[current_]->put(v, std::move(entries)); }
  void close(const TableHeader& header) { rounds_[current_]->header() = header; }

  template <typename F>
  void for_each_entry(unsigned h, NodeId v, F&& f) const {
    rounds_[h]->for_each_entry(v, std::forward<F>(f));
  }
  bool has(unsigned h) const { return h < rounds_.size() && rounds_[h] != nullptr; }
  const MemoryRound<C>& round(unsigned h) const { return *rounds_.at(h); }

 private:
  std::vector<std::unique_ptr<MemoryRound<C>>> rounds_;
  unsigned current_ = 0;
};

/// Rounds written as round_<h>.mct under a directory; earlier rounds are read
/// back through file mappings.
template <CountType C>
class FileStore {
 public:
  explicit FileStore(std::string dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void open(const TableHeader& header) {
    writer_ = std::make_unique<TableWriter<C>>(round_path(dir_, header.h), header);
    current_ = header.h;
  }
  void put(NodeId v, std::vector<Entry<C>>&& entries) { writer_->put(v, entries); }
  void close(const TableHeader& header) {
    writer_->header() = header;
    writer_->finish();
    writer_.reset();
    if (rounds_.size() <= current_) rounds_.resize(current_ + 1);
    rounds_[current_] = std::make_unique<MappedRound<C>>(round_path(dir_, current_), false);
  }

  template <typename F>
  void for_each_entry(unsigned h, NodeId v, F&& f) const {
    rounds_[h]->for_each_entry(v, std::forward<F>(f));
  }
  bool has(unsigned h) const { return h < rounds_.size() && rounds_[h] != nullptr; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::unique_ptr<TableWriter<C>> writer_;
  std::vector<std::unique_ptr<MappedRound<C>>> rounds_;
  unsigned current_ = 0;
};

namespace detail {

/// Per-node accumulator: dense for indexed keys, hashed otherwise.
template <CountType C, bool Dense>
class Accumulator;

template <CountType C>
class Accumulator<C, true> {
 public:
  explicit Accumulator(std::size_t universe) : slots_(universe), used_(universe, 0) {}
  void add(TreeletKey key, const C& c) {
    if (!used_[key]) {
      used_[key] = 1;
      touched_.push_back(key);
      slots_[key] = c;
    } else {
      slots_[key] = count_traits<C>::add(slots_[key], c);
    }
  }
  template <typename F>
  void drain(F&& f) {
    std::sort(touched_.begin(), touched_.end());
    for (auto key : touched_) {
      f(key, slots_[key]);
      used_[key] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<C> slots_;
  std::vector<unsigned char> used_;
  std::vector<TreeletKey> touched_;
};

template <CountType C>
class Accumulator<C, false> {
 public:
  explicit Accumulator(std::size_t) {}
  void add(TreeletKey key, const C& c) {
    auto [it, inserted] = map_.try_emplace(key, c);
    if (!inserted) it->second = count_traits<C>::add(it->second, c);
  }
  template <typename F>
  void drain(F&& f) {
    std::vector<std::pair<TreeletKey, C>> items(map_.begin(), map_.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [key, c] : items) f(key, c);
    map_.clear();
  }

 private:
  std::unordered_map<TreeletKey, C> map_;
};

template <typename Algebra>
std::size_t key_universe(const Algebra& alg) {
  if constexpr (Algebra::indexed())
    return alg.tables().count();
  else
    return 0;
}

template <CountType C>
C exact_divide(const C& value, unsigned divisor) {
  const C d = static_cast<C>(divisor);
  const C q = value / d;
  if (q * d != value) throw std::logic_error("treelet count not divisible by beta");
  return q;
}

}  // namespace detail

/// Header totals of a finished final round.
struct BuildSummary {
  TableHeader header;
  std::vector<unsigned> rounds;
};

/// Runs the DP and stores every round through `store`.
template <CountType C, typename Algebra, typename Store>
BuildSummary build_tables(const ColoredGraph& g, const Algebra& alg, const BuildOptions& opt, Store& store) {
  const unsigned k = alg.k();
  if (!g.colored() || g.k() != k) throw std::invalid_argument("graph must be colored with k colors");
  if (opt.vlc && !Algebra::indexed()) throw std::invalid_argument("VLC tables need indexed (ITE) keys");
  if (k < 2) throw std::invalid_argument("k must be at least 2");
  if (opt.skip_round && k < 3) throw std::invalid_argument("round skipping needs k >= 3");
  const bool skip = opt.skip_round;
  const bool zero_root = opt.zero_root && !skip;
  const auto rounds = stored_rounds(k, skip);
  const auto& universe = alg.universe();
  const std::size_t nclasses = universe.unrooted().size();
  const NodeId n = g.num_nodes();

  TableHeader base;
  base.k = k;
  base.n = n;
  base.lambda = opt.lambda;
  base.flags = (opt.vlc ? kFlagVlc : 0u) | (Algebra::indexed() ? kFlagIndexedKeys : 0u) | (opt.lambda > 0 ? kFlagBiased : 0u);

  TableHeader final_header;
  for (unsigned h : rounds) {
    const auto t0 = std::chrono::steady_clock::now();
    TableHeader header = base;
    header.h = h;
    if (h == k) header.flags |= (zero_root ? kFlagZeroRooted : 0u) | (skip ? kFlagRoundSkipped : 0u);
    store.open(header);

    const bool final_round = h == k;
    // Sizes at v used by this round; the neighbor supplies h - h1.
    unsigned lo = 1, hi = h - 1;
    if (final_round && skip) lo = 2, hi = k - 2;

    std::atomic<NodeId> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<U256> class_sums(nclasses, 0);
    std::uint64_t total_entries = 0;

    auto worker = [&]() {
      try {
        detail::Accumulator<C, Algebra::indexed()> acc(detail::key_universe(alg));
        std::vector<std::vector<Entry<C>>> own(h + 1), nb(h + 1);
        std::vector<U256> local_sums(nclasses, 0);
        std::uint64_t local_entries = 0;
        auto load = [&](NodeId x, std::vector<std::vector<Entry<C>>>& dst, unsigned a, unsigned b) {
          for (unsigned s = a; s <= b; ++s) {
            dst[s].clear();
            store.for_each_entry(s, x, [&](TreeletKey key, const C& c) { dst[s].push_back({key, c}); });
          }
        };
        while (!failed.load(std::memory_order_relaxed)) {
          const NodeId v = next.fetch_add(1);
          if (v >= n) break;
          std::vector<Entry<C>> out;
          if (h == 1) {
            out.push_back({alg.singleton(g.color(v)), C(1)});
          } else if (!(final_round && zero_root && g.color(v) != 0) && lo <= hi) {
            load(v, own, lo, hi);
            for (NodeId u : g.neighbors(v)) {
              load(u, nb, h - hi, h - lo);
              for (unsigned h1 = lo; h1 <= hi; ++h1) {
                const unsigned h2 = h - h1;
                for (const auto& a : own[h1]) {
                  const ColorSet ca = alg.colors(a.key);
                  for (const auto& b : nb[h2]) {
                    if (ca & alg.colors(b.key)) continue;
                    auto m = (final_round && skip) ? alg.balanced_merge(a.key, b.key) : alg.merge(a.key, b.key);
                    if (!m) continue;
                    acc.add(*m, count_traits<C>::mul(a.count, b.count));
                  }
                }
              }
            }
            acc.drain([&](TreeletKey key, const C& sum) {
              const unsigned beta = (final_round && skip) ? alg.balanced_beta(key) : alg.beta(key);
              out.push_back({key, detail::exact_divide(sum, beta)});
            });
          }
          if (final_round)
            for (const auto& e : out) {
              auto& slot = local_sums[alg.unrooted_of(e.key)];
              slot = count_traits<U256>::add(slot, count_cast<U256>(e.count));
            }
          local_entries += out.size();
          store.put(v, std::move(out));
        }
        std::lock_guard lock(mu);
        for (std::size_t j = 0; j < nclasses; ++j) class_sums[j] = count_traits<U256>::add(class_sums[j], local_sums[j]);
        total_entries += local_entries;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    };

    const unsigned nthreads = std::max(1u, opt.threads);
    if (nthreads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    if (final_round) {
      header.star_total = star_count(g, k);
      header.total = 0;
      for (std::size_t j = 0; j < nclasses; ++j) {
        const auto& cls = universe.unrooted()[j];
        if (skip && cls.star) continue;
        ShapeTotal st;
        st.canonical = cls.canonical;
        st.star = cls.star;
        st.multiplicity = zero_root ? 1u : skip ? cls.balanced->orbit : k;
        if (class_sums[j] % st.multiplicity != 0) throw std::logic_error("class total not divisible by multiplicity");
        st.copies = class_sums[j] / st.multiplicity;
        header.total = count_traits<U256>::add(header.total, st.copies);
        header.shapes.push_back(st);
      }
      final_header = header;
    }
    store.close(header);

    if (opt.on_round) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      opt.on_round({h, total_entries, secs});
    }
  }
  return {final_header, rounds};
}

}  // namespace motifcc
