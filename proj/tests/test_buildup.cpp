#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <motifcc/buildup.hpp>
#include <motifcc/oracle.hpp>

#include "support.hpp"

using namespace motifcc;

namespace {

using RootedCounts = std::map<std::tuple<NodeId, std::string, ColorSet>, U256>;

template <typename Algebra, typename Store>
RootedCounts dp_round(const ColoredGraph& g, const Algebra& alg, const Store& store, unsigned h) {
  RootedCounts out;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    store.for_each_entry(h, v, [&](TreeletKey key, const auto& c) {
      const auto t = alg.treelet(key);
      out[{v, rooted_code(t.shape), t.colors}] = count_cast<U256>(c);
    });
  return out;
}

RootedCounts oracle_round(const ColoredGraph& g, unsigned h, bool only_color0 = false) {
  auto all = exact_colorful_treelets(g, h).rooted;
  if (!only_color0) return all;
  RootedCounts out;
  for (const auto& [key, c] : all)
    if (g.color(std::get<0>(key)) == 0) out[key] = c;
  return out;
}

std::vector<unsigned char> file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("motifcc_build_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

ColoredGraph colored(ColoredGraph g, unsigned k, std::uint64_t seed) {
  color_uniform(g, k, seed);
  return g;
}

/// Per-copy t_j for every non-star class, by canonical shape.
std::map<TreeletShape, U256> nonstar_totals(const TableHeader& h) {
  std::map<TreeletShape, U256> out;
  for (const auto& s : h.shapes)
    if (!s.star) out[s.canonical] = s.copies;
  return out;
}

}  // namespace

TEST(Build, TriangleExample) {
  auto g = fixtures::with_colors(fixtures::triangle(), 3, {0, 1, 2});
  StructuralAlgebra alg(3);
  MemoryStore<U256> store;
  auto summary = build_tables<U256>(g, alg, BuildOptions{}, store);
  const TreeletShape center{3, 0b1010}, end{3, 0b1100};
  auto final_round = dp_round(g, alg, store, 3);
  const ColorSet all = 0b111;
  EXPECT_EQ(final_round[std::make_tuple(NodeId{0}, rooted_code(center), all)], U256(1));
  EXPECT_EQ(final_round[std::make_tuple(NodeId{0}, rooted_code(end), all)], U256(2));
  EXPECT_EQ(summary.header.total, U256(3));
  EXPECT_TRUE(summary.header.has(kFlagZeroRooted));
  // Only the color-0 node holds size-3 entries.
  U256 occ = 0;
  for (NodeId v = 0; v < 3; ++v) store.for_each_entry(3, v, [&](TreeletKey, const U256& c) { occ += c; });
  EXPECT_EQ(occ, U256(3));
  EXPECT_EQ(summary.rounds, (std::vector<unsigned>{1, 2, 3}));
}

TEST(Build, RepeatedColorContributesNothing) {
  auto g = fixtures::with_colors(fixtures::triangle(), 3, {0, 1, 1});
  StructuralAlgebra alg(3);
  MemoryStore<U256> store;
  auto summary = build_tables<U256>(g, alg, BuildOptions{}, store);
  EXPECT_EQ(summary.header.total, U256(0));
}

TEST(Build, StarTotalFromDegrees) {
  auto g = fixtures::with_colors(fixtures::star(5), 3, {0, 1, 2, 1, 2, 1});
  StructuralAlgebra alg(3);
  MemoryStore<U256> store;
  BuildOptions opt;
  opt.skip_round = true;
  auto summary = build_tables<U256>(g, alg, opt, store);
  EXPECT_EQ(summary.header.star_total, U256(10));
  EXPECT_TRUE(summary.header.has(kFlagRoundSkipped));
  EXPECT_FALSE(summary.header.has(kFlagZeroRooted));
  // At k = 3 every shape is a star, so the table holds no classes.
  EXPECT_TRUE(summary.header.shapes.empty());
  EXPECT_EQ(summary.rounds, (std::vector<unsigned>{1, 3}));
  EXPECT_EQ(star_count(fixtures::star(8), 4), U256(56));
}

TEST(Build, StoredRounds) {
  EXPECT_EQ(stored_rounds(5, false), (std::vector<unsigned>{1, 2, 3, 4, 5}));
  EXPECT_EQ(stored_rounds(5, true), (std::vector<unsigned>{1, 2, 3, 5}));
}

struct OracleCase {
  unsigned k;
  std::uint64_t seed;
};

class DpVsOracle : public ::testing::TestWithParam<OracleCase> {};

TEST_P(DpVsOracle, EveryRoundMatches) {
  const auto [k, seed] = GetParam();
  auto g = colored(fixtures::random_graph(25, 60, seed), k, seed * 31 + 1);
  StructuralAlgebra alg(k);
  MemoryStore<U256> store;
  BuildOptions opt;
  opt.zero_root = false;
  build_tables<U256>(g, alg, opt, store);
  for (unsigned h = 1; h <= k; ++h) EXPECT_EQ(dp_round(g, alg, store, h), oracle_round(g, h)) << "h=" << h;
}

TEST_P(DpVsOracle, ZeroRootedFinalRound) {
  const auto [k, seed] = GetParam();
  auto g = colored(fixtures::random_graph(25, 60, seed), k, seed * 31 + 1);
  IndexedAlgebra alg(k);
  MemoryStore<u128> store;
  auto summary = build_tables<u128>(g, alg, BuildOptions{}, store);
  EXPECT_EQ(dp_round(g, alg, store, k), oracle_round(g, k, true));
  const auto truth = exact_colorful_treelets(g, k);
  EXPECT_GT(truth.total, U256(0));
  EXPECT_EQ(summary.header.total, truth.total);
  // Per-class totals against unrooted parenthesis codes.
  std::map<std::string, U256> by_code;
  for (const auto& s : summary.header.shapes)
    if (!s.copies.is_zero()) by_code[unrooted_code(s.canonical)] = s.copies;
  EXPECT_EQ(by_code, truth.unrooted);
}

INSTANTIATE_TEST_SUITE_P(Random, DpVsOracle,
                         ::testing::Values(OracleCase{2, 1}, OracleCase{3, 2}, OracleCase{3, 3}, OracleCase{4, 4},
                                           OracleCase{4, 5}, OracleCase{5, 6}, OracleCase{5, 7}, OracleCase{6, 8}));

TEST(Build, CliqueK5ColorfulTrees) {
  // A colorful K5 holds 5^3 spanning trees; all are colorful 5-treelets.
  auto g = fixtures::with_colors(fixtures::clique(5), 5, {0, 1, 2, 3, 4});
  StructuralAlgebra alg(5);
  MemoryStore<U256> store;
  auto summary = build_tables<U256>(g, alg, BuildOptions{}, store);
  EXPECT_EQ(summary.header.total, U256(125));
}

class SkipVsCanonical : public ::testing::TestWithParam<unsigned> {};

TEST_P(SkipVsCanonical, NonStarTotalsAgree) {
  const unsigned k = GetParam();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto g = colored(fixtures::random_graph(18, 40, 100 + seed), k, seed);
    StructuralAlgebra alg(k);
    MemoryStore<U256> canon, canon_all, skip;
    BuildOptions a, b, c;
    b.zero_root = false;
    c.skip_round = true;
    const auto ha = build_tables<U256>(g, alg, a, canon).header;
    const auto hb = build_tables<U256>(g, alg, b, canon_all).header;
    const auto hc = build_tables<U256>(g, alg, c, skip).header;
    EXPECT_EQ(nonstar_totals(ha), nonstar_totals(hc)) << "seed " << seed;
    EXPECT_EQ(nonstar_totals(ha), nonstar_totals(hb)) << "seed " << seed;
    EXPECT_EQ(ha.total, hb.total);
    EXPECT_EQ(ha.star_total, hc.star_total);
    for (const auto& s : hc.shapes) EXPECT_FALSE(s.star);
  }
}

INSTANTIATE_TEST_SUITE_P(K, SkipVsCanonical, ::testing::Values(4u, 5u, 6u, 7u));

TEST(Build, ThreadCountDoesNotChangeFiles) {
  auto g = colored(fixtures::random_graph(60, 200, 5), 5, 9);
  IndexedAlgebra alg(5);
  std::vector<std::string> dirs;
  for (unsigned threads : {1u, 3u, 8u}) {
    dirs.push_back(temp_dir("threads" + std::to_string(threads)));
    FileStore<u128> store(dirs.back());
    BuildOptions opt;
    opt.threads = threads;
    build_tables<u128>(g, alg, opt, store);
  }
  for (unsigned h = 1; h <= 5; ++h)
    for (std::size_t i = 1; i < dirs.size(); ++i)
      EXPECT_EQ(file_bytes(round_path(dirs[0], h)), file_bytes(round_path(dirs[i], h))) << "h=" << h;
  for (const auto& d : dirs) std::filesystem::remove_all(d);
}

TEST(Build, VlcTablesDecodeIdentically) {
  auto g = colored(fixtures::random_graph(50, 160, 8), 5, 4);
  IndexedAlgebra alg(5);
  const auto d1 = temp_dir("fixed"), d2 = temp_dir("vlc");
  FileStore<U256> fixed(d1), vlc(d2);
  BuildOptions opt;
  opt.zero_root = false;
  const auto h1 = build_tables<U256>(g, alg, opt, fixed).header;
  opt.vlc = true;
  const auto h2 = build_tables<U256>(g, alg, opt, vlc).header;
  for (unsigned h = 1; h <= 5; ++h) EXPECT_EQ(dp_round(g, alg, fixed, h), dp_round(g, alg, vlc, h));
  EXPECT_EQ(h1.total, h2.total);
  EXPECT_TRUE(h2.has(kFlagVlc));
  EXPECT_LT(std::filesystem::file_size(round_path(d2, 4)), std::filesystem::file_size(round_path(d1, 4)));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST(Build, StructuralAndIndexedAgree) {
  auto g = colored(fixtures::random_graph(30, 80, 12), 6, 3);
  StructuralAlgebra s(6);
  IndexedAlgebra x(6);
  for (bool skip : {false, true}) {
    MemoryStore<U256> a, b;
    BuildOptions opt;
    opt.skip_round = skip;
    const auto ha = build_tables<U256>(g, s, opt, a).header;
    const auto hb = build_tables<U256>(g, x, opt, b).header;
    EXPECT_EQ(nonstar_totals(ha), nonstar_totals(hb));
    for (unsigned h : stored_rounds(6, skip)) EXPECT_EQ(dp_round(g, s, a, h), dp_round(g, x, b, h));
  }
}

TEST(Build, ZeroRootSumCountsEachCopyOnce) {
  auto g = colored(fixtures::random_graph(30, 90, 21), 4, 2);
  IndexedAlgebra alg(4);
  MemoryStore<U256> store;
  build_tables<U256>(g, alg, BuildOptions{}, store);
  U256 occ = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) store.for_each_entry(4, v, [&](TreeletKey, const U256& c) { occ += c; });
  EXPECT_EQ(occ, exact_colorful_treelets(g, 4).total);
}

TEST(Build, BiasedLambdaRecorded) {
  auto g = fixtures::random_graph(30, 60, 2);
  color_biased(g, 4, 0.1, 5);
  StructuralAlgebra alg(4);
  MemoryStore<U256> store;
  BuildOptions opt;
  opt.lambda = 0.1;
  auto h = build_tables<U256>(g, alg, opt, store).header;
  EXPECT_TRUE(h.has(kFlagBiased));
  EXPECT_DOUBLE_EQ(h.lambda, 0.1);
}

TEST(Build, RoundCallbackReportsEveryRound) {
  auto g = colored(fixtures::cycle(6), 4, 1);
  StructuralAlgebra alg(4);
  MemoryStore<U256> store;
  std::vector<unsigned> seen;
  BuildOptions opt;
  opt.skip_round = true;
  opt.on_round = [&](const BuildOptions::RoundStats& s) { seen.push_back(s.h); };
  build_tables<U256>(g, alg, opt, store);
  EXPECT_EQ(seen, (std::vector<unsigned>{1, 2, 4}));
}

TEST(Build, Errors) {
  auto g = fixtures::triangle();
  StructuralAlgebra alg(3);
  MemoryStore<U256> store;
  EXPECT_THROW(build_tables<U256>(g, alg, BuildOptions{}, store), std::invalid_argument);
  color_uniform(g, 3, 1);
  BuildOptions vlc;
  vlc.vlc = true;
  EXPECT_THROW(build_tables<U256>(g, alg, vlc, store), std::invalid_argument);
  auto g2 = fixtures::with_colors(fixtures::path(2), 2, {0, 1});
  StructuralAlgebra alg2(2);
  BuildOptions skip;
  skip.skip_round = true;
  EXPECT_THROW(build_tables<U256>(g2, alg2, skip, store), std::invalid_argument);
  EXPECT_THROW(build_tables<U256>(fixtures::with_colors(fixtures::path(3), 4, {0, 1, 2}), alg, BuildOptions{}, store),
               std::invalid_argument);
}

TEST(Build, OverflowIsDetected) {
  EXPECT_THROW(count_traits<u128>::mul(u128(1) << 100, u128(1) << 30), CapacityError);
  EXPECT_THROW(count_traits<u128>::add(~u128(0), u128(1)), CapacityError);
  EXPECT_THROW(count_traits<U256>::mul(U256(1) << 200, U256(1) << 60), CapacityError);
  EXPECT_THROW(count_cast<u128>(U256(1) << 130), CapacityError);
}
