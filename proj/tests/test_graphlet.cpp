#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include <motifcc/graphlet.hpp>
#include <motifcc/oracle.hpp>
#include <motifcc/profile.hpp>

#include "support.hpp"

using namespace motifcc;

namespace {

SmallGraph small(unsigned k, std::initializer_list<std::pair<unsigned, unsigned>> edges) {
  SmallGraph g;
  g.k = k;
  for (auto [a, b] : edges) g.add_edge(a, b);
  return g;
}

SmallGraph complete(unsigned k) {
  SmallGraph g;
  g.k = k;
  for (unsigned i = 0; i < k; ++i)
    for (unsigned j = i + 1; j < k; ++j) g.add_edge(i, j);
  return g;
}

/// Largest packed adjacency over all k! labelings.
u128 brute_canonical(const SmallGraph& g) {
  std::vector<unsigned> perm(g.k);
  std::iota(perm.begin(), perm.end(), 0u);
  u128 best = 0;
  do best = std::max(best, g.permuted(perm).pack());
  while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Spanning trees by deletion-contraction on a multigraph adjacency matrix.
std::uint64_t deletion_contraction(std::vector<std::vector<int>> m) {
  const std::size_t n = m.size();
  if (n == 1) return 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!m[i][j]) continue;
      auto del = m;
      del[i][j]--;
      del[j][i]--;
      // Contract j into i.
      std::vector<std::vector<int>> con(n - 1, std::vector<int>(n - 1, 0));
      auto idx = [&](std::size_t x) { return x == j ? i : (x > j ? x - 1 : x); };
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          const auto ia = idx(a), ib = idx(b);
          if (ia != ib) con[ia][ib] += m[a][b];
        }
      return deletion_contraction(del) + deletion_contraction(con);
    }
  return 0;
}

std::uint64_t deletion_contraction(const SmallGraph& g) {
  std::vector<std::vector<int>> m(g.k, std::vector<int>(g.k, 0));
  for (unsigned i = 0; i < g.k; ++i)
    for (unsigned j = 0; j < g.k; ++j) m[i][j] = g.edge(i, j);
  return deletion_contraction(m);
}

std::uint64_t power(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace

TEST(Signature, TriangleAllOrderings) {
  std::set<GraphletSignature> seen;
  const std::vector<NodeId> base{0, 1, 2};
  auto g = fixtures::triangle();
  std::vector<NodeId> order = base;
  do seen.insert(canonical_signature(extract_induced(g, order)));
  while (std::next_permutation(order.begin(), order.end()));
  EXPECT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen.begin()->to_hex(), "00000000000000000000000000000007");
}

TEST(Signature, PathAndStarDiffer) {
  auto p4 = canonical_signature(small(4, {{0, 1}, {1, 2}, {2, 3}}));
  auto s4 = canonical_signature(small(4, {{0, 1}, {0, 2}, {0, 3}}));
  EXPECT_NE(p4, s4);
  EXPECT_EQ(canonical_signature(small(4, {{3, 1}, {1, 0}, {0, 2}})), p4);
}

TEST(Signature, HexRoundTrip) {
  auto sig = canonical_signature(complete(8));
  EXPECT_EQ(sig.to_hex().size(), 32u);
  EXPECT_EQ(GraphletSignature::from_hex(8, sig.to_hex()), sig);
  EXPECT_EQ(GraphletSignature::from_hex(8, "0000000000000000000000000FFFFFFF"), sig);
  EXPECT_THROW(GraphletSignature::from_hex(8, "xyz"), std::invalid_argument);
  EXPECT_THROW(GraphletSignature::from_hex(8, std::string(32, 'g')), std::invalid_argument);
  EXPECT_EQ(canonical_signature(sig.graph()), sig);
}

class SignatureBrute : public ::testing::TestWithParam<unsigned> {};

TEST_P(SignatureBrute, EqualExactlyWhenIsomorphic) {
  const unsigned k = GetParam();
  Rng rng(k, 3);
  const unsigned pairs = k * (k - 1) / 2;
  const unsigned trials = k <= 5 ? (1u << pairs) : 400;
  std::map<u128, GraphletSignature> by_brute;
  std::map<GraphletSignature, u128> by_sig;
  for (unsigned t = 0; t < trials; ++t) {
    const u128 code = k <= 5 ? u128(t) : u128(rng.below(std::uint64_t{1} << pairs));
    const auto g = SmallGraph::unpack(k, code);
    const auto sig = canonical_signature(g);
    const auto brute = brute_canonical(g);
    auto [a, fresh_a] = by_brute.try_emplace(brute, sig);
    auto [b, fresh_b] = by_sig.try_emplace(sig, brute);
    ASSERT_EQ(a->second, sig) << "isomorphic graphs with different signatures";
    ASSERT_EQ(b->second, brute) << "non-isomorphic graphs with one signature";
    // The signature is itself a labeling of g.
    EXPECT_EQ(canonical_signature(sig.graph()), sig);
    EXPECT_EQ(brute_canonical(sig.graph()), brute);
  }
}

INSTANTIATE_TEST_SUITE_P(K, SignatureBrute, ::testing::Values(2u, 3u, 4u, 5u, 6u, 7u));

TEST(Signature, InvariantUnderRelabelingLargeK) {
  Rng rng(99, 1);
  for (unsigned k : {9u, 12u, 16u})
    for (int t = 0; t < 30; ++t) {
      SmallGraph g;
      g.k = k;
      for (unsigned i = 0; i < k; ++i)
        for (unsigned j = i + 1; j < k; ++j)
          if (rng.below(3) == 0) g.add_edge(i, j);
      std::vector<unsigned> perm(k);
      std::iota(perm.begin(), perm.end(), 0u);
      std::shuffle(perm.begin(), perm.end(), rng);
      EXPECT_EQ(canonical_signature(g), canonical_signature(g.permuted(perm)));
    }
}

TEST(Signature, RegularGraphsAreSeparated) {
  // Two 3-regular graphs on 6 nodes: the prism and K_{3,3}.
  auto prism = small(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}});
  auto k33 = small(6, {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}});
  EXPECT_NE(canonical_signature(prism), canonical_signature(k33));
}

TEST(Signature, CacheIsConsistent) {
  SignatureCache cache;
  auto g = small(4, {{0, 1}, {1, 2}, {2, 3}});
  auto h = small(4, {{2, 0}, {0, 3}, {3, 1}});
  EXPECT_EQ(cache.get(g), cache.get(h));
  EXPECT_EQ(cache.get(g), canonical_signature(g));
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Graphlet, ExtractInduced) {
  auto g = fixtures::lollipop(4, 2);
  const std::vector<NodeId> nodes{3, 4, 0};
  auto s = extract_induced(g, nodes);
  EXPECT_EQ(s.k, 3u);
  EXPECT_TRUE(s.edge(0, 1));
  EXPECT_TRUE(s.edge(0, 2));
  EXPECT_FALSE(s.edge(1, 2));
  EXPECT_TRUE(s.connected());
  const std::vector<NodeId> dup{1, 1, 2};
  EXPECT_THROW(extract_induced(g, dup), std::invalid_argument);
  EXPECT_FALSE(small(3, {{0, 1}}).connected());
}

TEST(Census, ClassCounts) {
  const std::vector<std::size_t> expected{1, 1, 2, 6, 21, 112, 853};
  for (unsigned k = 1; k <= 7; ++k) {
    auto classes = graphlet_classes(k);
    EXPECT_EQ(classes.size(), expected[k - 1]) << "k=" << k;
    for (const auto& c : classes) EXPECT_TRUE(c.graph().connected());
  }
}

TEST(Census, FiveNodeBruteForce) {
  std::set<GraphletSignature> seen;
  for (unsigned code = 0; code < 1024; ++code) {
    auto g = SmallGraph::unpack(5, code);
    if (g.connected()) seen.insert(canonical_signature(g));
  }
  EXPECT_EQ(seen.size(), 21u);
  auto classes = graphlet_classes(5);
  EXPECT_EQ(std::vector<GraphletSignature>(seen.begin(), seen.end()), classes);
}

TEST(Kirchhoff, Examples) {
  EXPECT_EQ(spanning_trees_kirchhoff(complete(4)), 16u);
  EXPECT_EQ(spanning_trees_kirchhoff(small(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})), 4u);
  EXPECT_EQ(spanning_trees_kirchhoff(small(4, {{0, 1}, {1, 2}, {2, 3}})), 1u);
  EXPECT_EQ(spanning_trees_kirchhoff(small(4, {{0, 1}, {2, 3}})), 0u);
  EXPECT_EQ(spanning_trees_kirchhoff(small(1, {})), 1u);
  for (unsigned k = 2; k <= 16; ++k) EXPECT_EQ(spanning_trees_kirchhoff(complete(k)), power(k, k - 2)) << k;
}

TEST(Kirchhoff, AgreesWithDeletionContraction) {
  for (unsigned k : {4u, 5u})
    for (unsigned code = 0; code < (1u << (k * (k - 1) / 2)); ++code) {
      auto g = SmallGraph::unpack(k, code);
      ASSERT_EQ(spanning_trees_kirchhoff(g), deletion_contraction(g)) << code;
    }
}

TEST(Profile, Examples) {
  StructuralAlgebra alg3(3);
  auto tri = spanning_profile(complete(3), alg3);
  ASSERT_EQ(tri.sigma.size(), 1u);
  EXPECT_EQ(tri.sigma[0], 3u);
  EXPECT_EQ(tri.total, 3u);

  for (unsigned k = 3; k <= 7; ++k) {
    StructuralAlgebra alg(k);
    SmallGraph star;
    star.k = k;
    for (unsigned i = 1; i < k; ++i) star.add_edge(0, i);
    for (bool skip : {false, true}) {
      if (skip && k < 3) continue;
      auto p = spanning_profile(star, alg, {skip, true});
      const auto sid = *alg.universe().star_id();
      for (std::size_t j = 0; j < p.sigma.size(); ++j) EXPECT_EQ(p.sigma[j], j == sid ? 1u : 0u);
    }
  }
}

class ProfileSums : public ::testing::TestWithParam<unsigned> {};

TEST_P(ProfileSums, SumEqualsKirchhoffInEverySemantics) {
  const unsigned k = GetParam();
  StructuralAlgebra alg(k);
  for (const auto& sig : graphlet_classes(k)) {
    const auto g = sig.graph();
    const auto sigma = spanning_trees_kirchhoff(g);
    const auto canon = spanning_profile(g, alg, {false, true});
    const auto all_roots = spanning_profile(g, alg, {false, false});
    const auto skip = spanning_profile(g, alg, {true, true});
    EXPECT_EQ(canon.total, sigma) << sig.to_hex();
    EXPECT_EQ(canon.sigma, all_roots.sigma);
    EXPECT_EQ(canon.sigma, skip.sigma) << sig.to_hex();
  }
}

INSTANTIATE_TEST_SUITE_P(K, ProfileSums, ::testing::Values(3u, 4u, 5u, 6u));

TEST(Profile, MatchesOracleTreeCodes) {
  // Each unrooted class count equals the oracle's spanning-tree classification.
  const unsigned k = 5;
  StructuralAlgebra alg(k);
  for (const auto& sig : graphlet_classes(k)) {
    auto g = sig.graph();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (unsigned i = 0; i < k; ++i)
      for (unsigned j = i + 1; j < k; ++j)
        if (g.edge(i, j)) edges.emplace_back(i, j);
    auto cg = ColoredGraph::from_edges(k, edges);
    cg.set_colors(k, {0, 1, 2, 3, 4});
    const auto truth = exact_colorful_treelets(cg, k).unrooted;
    const auto p = spanning_profile(g, alg);
    std::map<std::string, U256> got;
    for (std::size_t j = 0; j < p.sigma.size(); ++j)
      if (p.sigma[j]) got[unrooted_code(alg.universe().unrooted()[j].canonical)] = p.sigma[j];
    EXPECT_EQ(got, truth) << sig.to_hex();
  }
}

TEST(Profile, CacheMemoizes) {
  ProfileCache cache(4, {});
  const auto sig = canonical_signature(complete(4));
  const auto a = cache.get(sig);
  const auto b = cache.get(sig);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.total, 16u);
  EXPECT_THROW(spanning_profile(complete(3), cache.algebra()), std::invalid_argument);
}
