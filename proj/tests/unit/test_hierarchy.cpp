#include <doctest.h>

#include <random>

#include "isletnet/errors.hpp"
#include "isletnet/hierarchy.hpp"
#include "oracles.hpp"

using namespace isletnet;

namespace {

void check_same(const std::vector<Merge>& got, const std::vector<Merge>& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t t = 0; t < got.size(); ++t) {
    CAPTURE(t);
    CHECK(got[t].left == want[t].left);
    CHECK(got[t].right == want[t].right);
    CHECK(got[t].size == want[t].size);
    CHECK(std::abs(got[t].height - want[t].height) <= tol);
  }
}

oracle::Points grid_points(std::size_t n, std::uint64_t seed) {
  // Integer coordinates on a small grid produce many equal distances.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 4);
  oracle::Points out(n, std::vector<double>(2));
  for (auto& p : out) {
    for (auto& v : p) v = u(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("condensed distance matrix") {
  const auto d = pairwise_distances(oracle::Points{{0, 0}, {3, 4}, {0, 1}});
  CHECK(d.size() == 3);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);
  CHECK(d(0, 2) == 1.0);
  CHECK(d(2, 2) == 0.0);
  CHECK_THROWS_AS(DistanceMatrix(3, {1.0, 2.0}), DataError);
  CHECK_THROWS_AS(DistanceMatrix(2, {-1.0}), DataError);
  CHECK_THROWS_AS(pairwise_distances(oracle::Points{{0.0}}), ConfigError);
}

TEST_CASE("lance-williams presets") {
  CHECK(lance_williams_update(2, 5, 1, 1, 1, 1, Linkage::single()) == 2.0);
  CHECK(lance_williams_update(2, 5, 1, 1, 1, 1, Linkage::complete()) == 5.0);
  CHECK(lance_williams_update(2, 5, 1, 3, 1, 1, Linkage::average()) == doctest::Approx(2.75));
  CHECK(lance_williams_update(2, 6, 4, 1, 1, 1, Linkage::flexible(-0.25)) == doctest::Approx(0.625 * 8 - 1.0));
  CHECK(Linkage::flexible(-0.25).monotone());
  CHECK_FALSE(Linkage::flexible(1.5).monotone());
  CHECK(parse_linkage_kind("average") == LinkageKind::average);
  CHECK_THROWS_AS(parse_linkage_kind("ward"), ConfigError);
}

TEST_CASE("three-point single-link dendrogram") {
  const auto tree = build_dendrogram(pairwise_distances(oracle::Points{{0}, {1}, {10}}), Linkage::single());
  REQUIRE(tree.merges().size() == 2);
  CHECK(tree.merges()[0].left == 0);
  CHECK(tree.merges()[0].right == 1);
  CHECK(tree.merges()[0].height == 1.0);
  CHECK(tree.merges()[1].left == 2);
  CHECK(tree.merges()[1].right == 3);
  CHECK(tree.merges()[1].height == 9.0);
  CHECK(tree.root() == 4);
  CHECK(tree.leaves(4) == std::vector<std::size_t>{2, 0, 1});
  CHECK(tree.internal_nodes(4) == std::vector<std::size_t>{4, 3});
  CHECK(*tree.parent(3) == 4);
  CHECK_FALSE(tree.parent(4).has_value());
  CHECK(subtree_heights(tree, 4) == std::vector<double>{1.0, 9.0});
}

TEST_CASE("builder matches the recompute-from-points oracle") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto pts = oracle::random_points(5 + seed * 3, 1 + seed % 4, seed);
    const auto dist = pairwise_distances(pts);
    check_same(build_dendrogram(dist, Linkage::single()).merges(), oracle::naive_agglomeration(pts, LinkageKind::single),
               1e-9);
    check_same(build_dendrogram(dist, Linkage::complete()).merges(),
               oracle::naive_agglomeration(pts, LinkageKind::complete), 1e-9);
    check_same(build_dendrogram(dist, Linkage::average()).merges(),
               oracle::naive_agglomeration(pts, LinkageKind::average), 1e-9);
  }
}

TEST_CASE("builder matches a naive Lance-Williams scan, ties included") {
  const Linkage presets[] = {Linkage::single(), Linkage::complete(), Linkage::average(), Linkage::flexible(-0.25),
                             Linkage::flexible(0.0)};
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    for (const auto& params : presets) {
      const auto dist = pairwise_distances(grid_points(6 + seed, seed));
      // Exact equality: both sides apply the same update in the same order.
      check_same(build_dendrogram(dist, params).merges(), oracle::naive_lance_williams(dist, params), 0.0);
    }
  }
}

TEST_CASE("all-duplicate points give a zero-height tree") {
  const auto tree = build_dendrogram(pairwise_distances(oracle::Points(5, {1.0, 1.0})), Linkage::flexible(0.0));
  for (const auto& m : tree.merges()) CHECK(m.height == 0.0);
  CHECK(tree.merges()[0].left == 0);
  CHECK(tree.merges()[0].right == 1);
}

TEST_CASE("monotone linkages give non-decreasing heights") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (const auto& params : {Linkage::single(), Linkage::complete(), Linkage::average(), Linkage::flexible(-0.25)}) {
      const auto tree = oracle::random_dendrogram(40, 3, seed, params);
      for (std::size_t t = 0; t < tree.merges().size(); ++t) {
        const auto& m = tree.merges()[t];
        CHECK(m.height >= tree.height(m.left));
        CHECK(m.height >= tree.height(m.right));
      }
    }
  }
}

TEST_CASE("dendrogram validation") {
  CHECK_THROWS_AS(Dendrogram(3, {{0, 1, 1.0, 2}}), DataError);
  CHECK_THROWS_AS(Dendrogram(3, {{0, 1, 1.0, 2}, {0, 2, 2.0, 2}}), DataError);
  CHECK_THROWS_AS(Dendrogram(3, {{0, 1, 1.0, 2}, {2, 4, 2.0, 3}}), DataError);
  CHECK_THROWS_AS(Dendrogram(3, {{0, 1, 1.0, 3}, {2, 3, 2.0, 3}}), DataError);
  CHECK_THROWS_AS(Dendrogram(3, {{0, 1, -1.0, 2}, {2, 3, 2.0, 3}}), DataError);
  const Dendrogram ok(3, {{0, 1, 1.0, 2}, {2, 3, 2.0, 3}});
  CHECK_THROWS_AS(ok.height(5), ConfigError);
  CHECK_THROWS_AS(ok.merge(0), ConfigError);
}
