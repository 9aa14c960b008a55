#pragma once

// Spanning profiles: for a k-node graphlet, the number of its spanning trees
// in each unrooted k-treelet class, obtained by running the table build on
// the graphlet with every node given its own color.

#include <map>
#include <memory>
#include <shared_mutex>
#include <vector>

#include "algebra.hpp"
#include "buildup.hpp"
#include "graphlet.hpp"

namespace motifcc {

struct SpanningProfile {
  std::vector<std::uint64_t> sigma;  ///< per unrooted class id
  std::uint64_t total = 0;           ///< sum of sigma
};

/// Table semantics that a profile must mirror.
struct ProfileSemantics {
  bool skip_round = false;
  bool zero_root = true;
};

/// Under round skipping stars are not stored; their entry is the number of
/// nodes adjacent to all others.
inline SpanningProfile spanning_profile(const SmallGraph& h, const StructuralAlgebra& alg, ProfileSemantics sem = {}) {
  const unsigned k = alg.k();
  if (h.k != k) throw std::invalid_argument("graphlet size differs from k");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (unsigned i = 0; i < k; ++i)
    for (unsigned j = i + 1; j < k; ++j)
      if (h.edge(i, j)) edges.emplace_back(i, j);
  auto g = ColoredGraph::from_edges(k, edges);
  std::vector<Color> colors(k);
  for (unsigned i = 0; i < k; ++i) colors[i] = static_cast<Color>(i);
  g.set_colors(k, colors);

  BuildOptions opt;
  opt.skip_round = sem.skip_round;
  opt.zero_root = sem.zero_root;
  MemoryStore<u128> store;
  const auto summary = build_tables<u128>(g, alg, opt, store);

  SpanningProfile p;
  p.sigma.assign(alg.universe().unrooted().size(), 0);
  for (const auto& s : summary.header.shapes) p.sigma[alg.universe().unrooted_id(s.canonical)] = static_cast<std::uint64_t>(s.copies);
  if (sem.skip_round) {
    if (auto star = alg.universe().star_id()) {
      std::uint64_t centers = 0;
      for (unsigned i = 0; i < k; ++i) centers += h.degree(i) == k - 1;
      p.sigma[*star] = centers;
    }
  }
  for (auto s : p.sigma) p.total += s;
  return p;
}

/// Profiles memoized per signature. Safe for concurrent use; a racing
/// duplicate computation stores an identical value.
class ProfileCache {
 public:
  ProfileCache(unsigned k, ProfileSemantics sem) : alg_(std::make_shared<StructuralAlgebra>(k)), sem_(sem) {}

  const StructuralAlgebra& algebra() const { return *alg_; }
  ProfileSemantics semantics() const { return sem_; }

  SpanningProfile get(const GraphletSignature& sig) {
    {
      std::shared_lock lock(mu_);
      auto it = memo_.find(sig);
      if (it != memo_.end()) return it->second;
    }
    auto p = spanning_profile(sig.graph(), *alg_, sem_);
    std::unique_lock lock(mu_);
    memo_.insert_or_assign(sig, p);
    return p;
  }

 private:
  std::shared_ptr<StructuralAlgebra> alg_;
  ProfileSemantics sem_;
  std::shared_mutex mu_;
  std::map<GraphletSignature, SpanningProfile> memo_;
};

}  // namespace motifcc
