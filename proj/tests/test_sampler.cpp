#include <gtest/gtest.h>

#include <map>

#include <motifcc/alias.hpp>
#include <motifcc/buildup.hpp>
#include <motifcc/graphlet.hpp>
#include <motifcc/sampler.hpp>

#include "stats.hpp"
#include "support.hpp"

using namespace motifcc;
using fixtures::Copy;

namespace {

/// A graph with its tables built in memory.
struct Built {
  ColoredGraph g;
  IndexedAlgebra alg;
  MemoryStore<u128> store;
  TableSet<u128> tables;
  TableHeader header;

  Built(ColoredGraph graph, unsigned k, BuildOptions opt = {})
      : g(std::move(graph)), alg(k), tables(k) {
    header = build_tables<u128>(g, alg, opt, store).header;
    tables = TableSet<u128>::from_store(store, k);
  }
};

ColoredGraph colored(ColoredGraph g, unsigned k, std::uint64_t seed) {
  color_uniform(g, k, seed);
  return g;
}

/// Draws n copies and returns per-copy hit counts in the order of `copies`.
template <typename Draw>
std::vector<std::uint64_t> tally(const std::vector<Copy>& copies, std::uint64_t n, Draw&& draw) {
  std::map<Copy, std::size_t> index;
  for (std::size_t i = 0; i < copies.size(); ++i) index[copies[i]] = i;
  std::vector<std::uint64_t> hits(copies.size(), 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto c = draw();
    auto it = index.find(fixtures::normalize_copy(c.edges));
    if (it == index.end()) {
      ADD_FAILURE() << "drew a copy outside the enumerated set";
      return hits;
    }
    ++hits[it->second];
  }
  return hits;
}

}  // namespace

TEST(Alias, Frequencies) {
  AliasTable a(std::vector<u128>{1, 2, 3});
  Rng rng(1, 0);
  std::vector<std::uint64_t> hits(3, 0);
  const std::uint64_t n = 600000;
  for (std::uint64_t i = 0; i < n; ++i) ++hits[a(rng)];
  EXPECT_LT(fixtures::binomial_z(hits[0], n, 1.0 / 6), 5);
  EXPECT_LT(fixtures::binomial_z(hits[1], n, 1.0 / 3), 5);
  EXPECT_LT(fixtures::binomial_z(hits[2], n, 1.0 / 2), 5);
  EXPECT_EQ(a.total(), U256(6));
}

TEST(Alias, FairCoinAndZeroWeights) {
  AliasTable coin(std::vector<u128>{1, 1});
  AliasTable gaps(std::vector<u128>{0, 5, 0, 5, 0});
  Rng rng(2, 0);
  std::uint64_t heads = 0;
  for (int i = 0; i < 100000; ++i) heads += coin(rng);
  EXPECT_LT(fixtures::binomial_z(heads, 100000, 0.5), 5);
  for (int i = 0; i < 10000; ++i) {
    const auto x = gaps(rng);
    EXPECT_TRUE(x == 1 || x == 3);
  }
}

TEST(Alias, WideWeights) {
  const U256 big = U256(1) << 200;
  AliasTable a(std::vector<U256>{big, big * 3});
  Rng rng(3, 0);
  std::uint64_t ones = 0;
  for (int i = 0; i < 80000; ++i) ones += a(rng);
  EXPECT_LT(fixtures::binomial_z(ones, 80000, 0.75), 5);
}

TEST(Alias, Errors) {
  EXPECT_THROW(AliasTable(std::vector<u128>{}), std::invalid_argument);
  EXPECT_THROW(AliasTable(std::vector<u128>{0, 0}), std::invalid_argument);
}

TEST(StarSampler, DegreeFiveStar) {
  auto g = fixtures::star(5);
  StarSampler s(g, 3);
  EXPECT_EQ(s.total(), U256(10));
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> hits;
  Rng rng(4, 0);
  const std::uint64_t n = 50000;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto c = s.sample(rng);
    ASSERT_TRUE(c.star);
    ASSERT_EQ(c.nodes.size(), 3u);
    EXPECT_EQ(c.nodes[0], 0u);
    ASSERT_NE(c.nodes[1], c.nodes[2]);
    ++hits[std::minmax(c.nodes[1], c.nodes[2])];
  }
  ASSERT_EQ(hits.size(), 10u);
  for (const auto& [pair, h] : hits) EXPECT_LT(fixtures::binomial_z(h, n, 0.1), 5);
}

TEST(StarSampler, CenterChosenByBinomialWeight) {
  fixtures::EdgeList e;
  for (NodeId i = 1; i <= 4; ++i) e.emplace_back(0, i);
  for (NodeId i = 6; i <= 13; ++i) e.emplace_back(5, i);
  auto g = fixtures::make_graph(14, e);
  StarSampler s(g, 3);
  EXPECT_EQ(s.total(), U256(34));
  Rng rng(5, 0);
  std::uint64_t big = 0;
  const std::uint64_t n = 40000;
  for (std::uint64_t i = 0; i < n; ++i) big += s.sample(rng).nodes[0] == 5;
  EXPECT_LT(fixtures::binomial_z(big, n, 28.0 / 34), 5);
}

TEST(StarSampler, EmptyPool) {
  StarSampler s(fixtures::path(3), 4);
  EXPECT_TRUE(s.empty());
  Rng rng(1, 1);
  EXPECT_THROW(s.sample(rng), EmptyPoolError);
}

TEST(Sampler, TriangleCopiesAreEquallyLikely) {
  Built b(fixtures::with_colors(fixtures::triangle(), 3, {0, 1, 2}), 3);
  TreeletSampler<u128, IndexedAlgebra> sampler(b.g, b.alg, b.tables);
  typename decltype(sampler)::Session session(sampler);
  const auto copies = fixtures::colorful_tree_copies(b.g, 3);
  ASSERT_EQ(copies.size(), 3u);
  Rng rng(6, 0);
  const std::uint64_t n = 30000;
  auto hits = tally(copies, n, [&] { return session.sample(rng); });
  for (auto h : hits) EXPECT_LT(fixtures::binomial_z(h, n, 1.0 / 3), 5);
}

TEST(Sampler, NoColorfulCopies) {
  Built b(fixtures::with_colors(fixtures::path(3), 3, {0, 1, 0}), 3);
  TreeletSampler<u128, IndexedAlgebra> sampler(b.g, b.alg, b.tables);
  EXPECT_TRUE(sampler.empty());
  typename decltype(sampler)::Session session(sampler);
  Rng rng(1, 0);
  try {
    session.sample(rng);
    FAIL() << "expected an empty-pool error";
  } catch (const EmptyPoolError& e) {
    EXPECT_STREQ(e.what(), "none exist");
  }
}

TEST(Sampler, CopiesAreValidTrees) {
  Built b(colored(fixtures::random_graph(40, 120, 3), 5, 8), 5);
  TreeletSampler<u128, IndexedAlgebra> sampler(b.g, b.alg, b.tables);
  typename decltype(sampler)::Session session(sampler);
  Rng rng(7, 0);
  for (int i = 0; i < 2000; ++i) {
    auto c = session.sample(rng);
    ASSERT_EQ(c.nodes.size(), 5u);
    ASSERT_EQ(c.edges.size(), 4u);
    EXPECT_EQ(b.g.color(c.nodes[0]), 0);
    ColorSet seen = 0;
    for (NodeId v : c.nodes) seen = static_cast<ColorSet>(seen | (1u << b.g.color(v)));
    EXPECT_EQ(seen, 0b11111);
    for (auto [u, v] : c.edges) EXPECT_TRUE(b.g.adjacent(u, v));
    EXPECT_TRUE(extract_induced(b.g, c.nodes).connected());
  }
}

struct Mode {
  const char* name;
  bool skip;
  bool zero_root;
  std::size_t delta0;
  std::size_t buffer;
};

class Uniformity : public ::testing::TestWithParam<Mode> {};

TEST_P(Uniformity, ChiSquareOverCopies) {
  const auto mode = GetParam();
  const unsigned k = 4;
  BuildOptions opt;
  opt.skip_round = mode.skip;
  opt.zero_root = mode.zero_root;
  Built b(colored(fixtures::random_graph(14, 24, 41), k, 5), k, opt);
  SamplerOptions sopt;
  sopt.delta0 = mode.delta0;
  sopt.buffer = mode.buffer;
  TreeletSampler<u128, IndexedAlgebra> sampler(b.g, b.alg, b.tables, sopt);
  typename decltype(sampler)::Session session(sampler);
  const auto copies = fixtures::colorful_tree_copies(b.g, k, !mode.skip);
  ASSERT_GE(copies.size(), 10u);
  ASSERT_LE(copies.size(), 200u);
  Rng rng(8, 0);
  auto hits = tally(copies, 100000, [&] { return session.sample(rng); });
  EXPECT_GT(fixtures::chi_square_uniform_pvalue(hits), 0.001) << mode.name;
}

INSTANTIATE_TEST_SUITE_P(Modes, Uniformity,
                         ::testing::Values(Mode{"zero_root", false, true, 4096, 1024},
                                           Mode{"all_roots", false, false, 4096, 1024},
                                           Mode{"skip", true, true, 4096, 1024},
                                           Mode{"buffered", false, true, 1, 16},
                                           Mode{"buffered_skip", true, true, 2, 7}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Sampler, ClassSamplerIsUniformWithinClass) {
  const unsigned k = 4;
  Built b(colored(fixtures::random_graph(14, 26, 43), k, 2), k);
  TreeletSampler<u128, IndexedAlgebra> sampler(b.g, b.alg, b.tables);
  typename decltype(sampler)::Session session(sampler);
  const auto& universe = b.alg.universe();
  const auto all = fixtures::colorful_tree_copies(b.g, k);
  Rng rng(9, 0);
  for (std::uint32_t j = 0; j < universe.unrooted().size(); ++j) {
    const bool star = universe.unrooted()[j].star;
    std::vector<Copy> copies;
    for (const auto& c : all) {
      std::vector<unsigned> deg(b.g.num_nodes(), 0);
      for (auto [u, v] : c) ++deg[u], ++deg[v];
      const bool is_star = std::find(deg.begin(), deg.end(), k - 1) != deg.end();
      if (is_star == star) copies.push_back(c);
    }
    if (copies.empty()) {
      EXPECT_TRUE(sampler.class_empty(j));
      continue;
    }
    auto hits = tally(copies, 40000, [&] { return session.sample_class(j, rng); });
    EXPECT_GT(fixtures::chi_square_uniform_pvalue(hits), 0.001) << "class " << j;
  }
  EXPECT_THROW(sampler.class_empty(99), std::out_of_range);
}

TEST(Sampler, BufferingKeepsExactDistribution) {
  // A hub adjacent to everything, buffered with a tiny buffer.
  fixtures::EdgeList e;
  for (NodeId i = 1; i < 12; ++i) e.emplace_back(0, i);
  for (NodeId i = 1; i + 1 < 12; i += 2) e.emplace_back(i, i + 1);
  const unsigned k = 3;
  Built b(colored(fixtures::make_graph(12, e), k, 3), k);
  SamplerOptions sopt;
  sopt.delta0 = 5;
  sopt.buffer = 3;
  TreeletSampler<u128, IndexedAlgebra> sampler(b.g, b.alg, b.tables, sopt);
  typename decltype(sampler)::Session session(sampler);
  const auto copies = fixtures::colorful_tree_copies(b.g, k);
  Rng rng(10, 0);
  auto hits = tally(copies, 60000, [&] { return session.sample(rng); });
  EXPECT_GT(fixtures::chi_square_uniform_pvalue(hits), 0.001);
}

TEST(Sampler, LoadedFromDiskMatchesMemory) {
  const unsigned k = 4;
  auto g = colored(fixtures::random_graph(30, 70, 5), k, 1);
  IndexedAlgebra alg(k);
  const auto dir = (std::filesystem::temp_directory_path() / "motifcc_sampler_disk").string();
  std::filesystem::remove_all(dir);
  FileStore<u128> store(dir);
  BuildOptions opt;
  opt.vlc = true;
  build_tables<u128>(g, alg, opt, store);
  auto tables = TableSet<u128>::load_directory(dir, k);
  Built mem(g, k);
  TreeletSampler<u128, IndexedAlgebra> a(g, alg, tables), b(mem.g, mem.alg, mem.tables);
  typename decltype(a)::Session sa(a), sb(b);
  Rng r1(3, 3), r2(3, 3);
  for (int i = 0; i < 500; ++i) EXPECT_EQ(sa.sample(r1).edges, sb.sample(r2).edges);
  EXPECT_THROW(TableSet<u128>::load_directory(dir + "/missing", k), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Mixture, ProbabilityAndEdgeCases) {
  TableHeader h;
  h.flags = kFlagRoundSkipped;
  h.total = 30;
  h.star_total = 100;
  EXPECT_NEAR(static_cast<double>(star_branch_probability(h, 0.1L)), 10.0 / 40.0, 1e-15);
  h.flags = 0;
  EXPECT_EQ(star_branch_probability(h, 0.1L), 0.0L);

  // Without skipping, the mixture never draws a star from degrees.
  const unsigned k = 4;
  Built canon(colored(fixtures::random_graph(20, 40, 6), k, 1), k);
  TreeletSampler<u128, IndexedAlgebra> ts(canon.g, canon.alg, canon.tables);
  StarSampler stars(canon.g, k);
  GraphletMixture<u128, IndexedAlgebra> m(ts, stars, 6.0L / 64);
  EXPECT_EQ(m.star_probability(), 0.0L);
  Rng rng(1, 2);
  for (int i = 0; i < 100; ++i) EXPECT_FALSE(m.sample(rng).star);

  // A star graph with skipping: only the star pool is left.
  BuildOptions opt;
  opt.skip_round = true;
  Built only_stars(colored(fixtures::star(6), k, 2), k, opt);
  TreeletSampler<u128, IndexedAlgebra> ts2(only_stars.g, only_stars.alg, only_stars.tables);
  StarSampler stars2(only_stars.g, k);
  GraphletMixture<u128, IndexedAlgebra> m2(ts2, stars2, 6.0L / 64);
  EXPECT_TRUE(ts2.empty());
  EXPECT_EQ(m2.star_probability(), 1.0L);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(m2.sample(rng).star);

  // Nothing at all.
  Built none(fixtures::with_colors(fixtures::path(3), k, {0, 1, 2}), k, opt);
  TreeletSampler<u128, IndexedAlgebra> ts3(none.g, none.alg, none.tables);
  StarSampler stars3(none.g, k);
  GraphletMixture<u128, IndexedAlgebra> m3(ts3, stars3, 6.0L / 64);
  EXPECT_THROW(m3.sample(rng), EmptyPoolError);
}

TEST(Mixture, SplitsStarAndTableMass) {
  const unsigned k = 4;
  BuildOptions opt;
  opt.skip_round = true;
  Built b(colored(fixtures::random_graph(25, 60, 9), k, 4), k, opt);
  TreeletSampler<u128, IndexedAlgebra> ts(b.g, b.alg, b.tables);
  StarSampler stars(b.g, k);
  const long double p = 6.0L / 64;
  GraphletMixture<u128, IndexedAlgebra> m(ts, stars, p);
  const double expected = static_cast<double>(star_branch_probability(b.header, p));
  ASSERT_GT(expected, 0.0);
  ASSERT_LT(expected, 1.0);
  Rng rng(11, 0);
  std::uint64_t star_hits = 0;
  const std::uint64_t n = 40000;
  for (std::uint64_t i = 0; i < n; ++i) star_hits += m.sample(rng).star;
  EXPECT_LT(fixtures::binomial_z(star_hits, n, expected), 5);
}
