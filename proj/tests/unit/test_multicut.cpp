#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "isletnet/errors.hpp"
#include "isletnet/islet.hpp"
#include "isletnet/multicut.hpp"
#include "oracles.hpp"

using namespace isletnet;

namespace {

std::vector<std::vector<std::size_t>> member_sets(const Clustering& c) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& cl : c.clusters) out.push_back(cl.members);
  std::sort(out.begin(), out.end());
  return out;
}

void check_partition(const Dendrogram& tree, const Clustering& c) {
  const auto assignment = c.assignment(tree.leaf_count());
  CHECK(assignment.size() == tree.leaf_count());
  for (const auto& cl : c.clusters) {
    auto leaves = tree.leaves(cl.node);
    std::sort(leaves.begin(), leaves.end());
    CHECK(leaves == cl.members);
  }
}

Dendrogram fig2_tree(std::uint64_t seed, Dataset* data = nullptr) {
  const auto d = synth_density_variation(fig2_preset(), seed);
  if (data) *data = d;
  return build_dendrogram(pairwise_distances(d), Linkage::flexible(0.0));
}

}  // namespace

TEST_CASE("variation coefficient by hand") {
  CHECK(variation_coefficient(std::vector<double>{1, 1, 2, 2}, 2) == 0.0);
  CHECK(variation_coefficient(std::vector<double>{1, 1, 1, 9}, 2) == doctest::Approx(0.5));
  CHECK(variation_coefficient(std::vector<double>{3, 3, 3}, 10) == 0.0);
  CHECK_THROWS_AS(variation_coefficient(std::vector<double>{1.0}, 2), ConfigError);
  CHECK_THROWS_AS(variation_coefficient(std::vector<double>{1.0, 2.0}, 1), ConfigError);
}

TEST_CASE("height histogram bins") {
  const std::vector<double> h{0.0, 0.5, 1.0, 2.0, 4.0};
  const auto hist = HeightHistogram::build(h, 4);
  CHECK(hist.bar_counts == std::vector<std::size_t>{2, 1, 1, 1});
  CHECK(hist.min == 0.0);
  CHECK(hist.max == 4.0);
}

TEST_CASE("variation coefficient is scale invariant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto tree = oracle::random_dendrogram(30, 2, seed, Linkage::average());
    auto h = subtree_heights(tree, tree.root());
    const double base = variation_coefficient(h, 10);
    for (double c : {0.5, 4.0}) {
      std::vector<double> scaled;
      for (double v : h) scaled.push_back(v * c);
      CHECK(variation_coefficient(scaled, 10) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("gap cut examples") {
  // heights 1, 1.1, 9
  const Dendrogram a(4, {{0, 1, 1.0, 2}, {2, 3, 1.1, 2}, {4, 5, 9.0, 4}});
  const auto ca = gap_cut(a, a.root());
  CHECK(ca.threshold == 9.0);
  CHECK(ca.roots == std::vector<std::size_t>{4, 5});

  const Dendrogram pair(2, {{0, 1, 3.0, 2}});
  CHECK(gap_cut(pair, pair.root()).roots == std::vector<std::size_t>{0, 1});

  // heights 1, 2, 3 with equal gaps: the higher cut wins
  const Dendrogram chain(4, {{0, 1, 1.0, 2}, {2, 4, 2.0, 3}, {3, 5, 3.0, 4}});
  const auto cc = gap_cut(chain, chain.root());
  CHECK(cc.threshold == 3.0);
  CHECK(cc.roots == std::vector<std::size_t>{3, 5});

  CHECK_THROWS_AS(gap_cut(chain, 0), ConfigError);
}

TEST_CASE("gap cut threshold property") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tree = oracle::random_dendrogram(25, 2, seed, Linkage::complete());
    for (auto node : tree.internal_nodes(tree.root())) {
      if (tree.size(node) < 3) continue;
      const auto cut = gap_cut(tree, node);
      CHECK(cut.roots.size() >= 2);
      std::size_t covered = 0;
      for (auto r : cut.roots) {
        CHECK(tree.height(r) < cut.threshold);
        covered += tree.size(r);
        for (auto p = tree.parent(r); p && *p != node; p = tree.parent(*p)) CHECK(tree.height(*p) >= cut.threshold);
      }
      CHECK(covered == tree.size(node));
    }
  }
}

TEST_CASE("two points form one cluster") {
  const Dendrogram pair(2, {{0, 1, 3.0, 2}});
  const auto c = multilevel_cut(pair, {});
  REQUIRE(c.clusters.size() == 1);
  CHECK(c.clusters[0].members == std::vector<std::size_t>{0, 1});
}

TEST_CASE("multilevel cut of the fig2 scenario, seed 0") {
  Dataset data;
  const auto tree = fig2_tree(0, &data);
  const auto labels = data.labels();
  const auto c = multilevel_cut(tree, {1.0, 40, 2});
  check_partition(tree, c);
  CHECK(c.clusters.size() == 6);
  CHECK(oracle::matched_agreement(c, labels) >= 0.95);

  // No single level separates both the sparse and the dense clusters.
  const auto single = single_cut_baseline(tree, 6);
  CHECK(oracle::matched_agreement(single, labels) < 0.95);
}

TEST_CASE("single cut baseline") {
  const auto tree = build_dendrogram(pairwise_distances(oracle::Points{{0}, {1}, {10}}), Linkage::single());
  CHECK(member_sets(single_cut_baseline(tree, 2)) == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
  CHECK(single_cut_baseline(tree, 1).clusters.size() == 1);
  CHECK(single_cut_baseline(tree, 3).clusters.size() == 3);
  CHECK_THROWS_AS(single_cut_baseline(tree, 0), ConfigError);
  CHECK_THROWS_AS(single_cut_baseline(tree, 4), ConfigError);
  for (std::size_t k = 1; k <= 30; ++k) {
    const auto t = oracle::random_dendrogram(30, 2, k, Linkage::average());
    const auto c = single_cut_baseline(t, k);
    CHECK(c.clusters.size() == k);
    check_partition(t, c);
  }
}

TEST_CASE("multilevel cut is a partition and refines as alpha grows") {
  const Linkage linkages[] = {Linkage::single(), Linkage::complete(), Linkage::average(), Linkage::flexible(0.0)};
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto tree = oracle::random_dendrogram(10 + seed * 2, 1 + seed % 3, seed, linkages[seed % 4]);
    std::size_t previous = 0;
    for (double alpha : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 100.0}) {
      for (std::size_t bins : {2u, 10u, 40u}) {
        const auto c = multilevel_cut(tree, {alpha, bins, 2});
        check_partition(tree, c);
      }
      const auto c = multilevel_cut(tree, {alpha, 10, 2});
      CHECK(c.clusters.size() >= previous);
      previous = c.clusters.size();
    }
  }
}

TEST_CASE("min_nodes keeps small subtrees whole") {
  const auto tree = oracle::random_dendrogram(40, 2, 3, Linkage::average());
  for (std::size_t min_nodes : {2u, 5u, 20u, 39u}) {
    for (const auto& cl : multilevel_cut(tree, {100.0, 10, min_nodes}).clusters) {
      if (cl.members.size() - 1 >= min_nodes) continue;
      // every untested cluster must be a whole subtree child of a split node
      CHECK(tree.leaves(cl.node).size() == cl.members.size());
    }
  }
  CHECK(multilevel_cut(tree, {100.0, 10, 40}).clusters.size() == 1);
}

TEST_CASE("cut config validation") {
  CHECK_THROWS_AS(CutConfig({0.0, 10, 2}).validate(), ConfigError);
  CHECK_THROWS_AS(CutConfig({1.0, 1, 2}).validate(), ConfigError);
  CHECK_THROWS_AS(CutConfig({1.0, 10, 1}).validate(), ConfigError);
}

TEST_CASE("search_alpha with a constant quality") {
  const auto tree = oracle::random_dendrogram(20, 2, 1, Linkage::average());
  const std::vector<int> labels(20, 0);
  const ClusteringQuality constant = [](const Clustering&, std::span<const int>) { return 1.0; };
  const double a = search_alpha(tree, labels, constant, {}, {10.0, 5});
  CHECK(a == 10.0 / 32.0);
  CHECK(search_alpha(tree, labels, constant, {}, {10.0, 5}) == a);
  CHECK_THROWS_AS(search_alpha(tree, labels, constant, {}, {0.0, 5}), ConfigError);
  CHECK_THROWS_AS(search_alpha(tree, labels, constant, {}, {10.0, 0}), ConfigError);
  CHECK_THROWS_AS(search_alpha(tree, std::vector<int>(3, 0), constant, {}, {10.0, 5}), DataError);
}

TEST_CASE("search_alpha beats a coarse grid on islet coverage") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Dataset data;
    const auto tree = fig2_tree(seed, &data);
    const auto labels = data.labels();
    const auto quality = islet_coverage_quality(tree, {15});
    const double alpha = search_alpha(tree, labels, quality, {}, {10.0, 8});
    CutConfig cfg;
    cfg.alpha = alpha;
    const double best = quality(multilevel_cut(tree, cfg), labels);
    for (double a : {0.5, 1.0, 2.0, 5.0, 10.0}) {
      cfg.alpha = a;
      CHECK(best >= quality(multilevel_cut(tree, cfg), labels));
    }
  }
}

TEST_CASE("two clusters raise the root coefficient") {
  std::size_t wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::vector<ClusterSpec> one{{{0.0, 0.0}, 1.0, 100}};
    const std::vector<ClusterSpec> two{{{0.0, 0.0}, 1.0, 50}, {{6.0, 0.0}, 1.0, 50}};
    const auto t1 = build_dendrogram(pairwise_distances(synth_density_variation(one, seed)), Linkage::flexible(0.0));
    const auto t2 = build_dendrogram(pairwise_distances(synth_density_variation(two, seed)), Linkage::flexible(0.0));
    if (variation_coefficient(t2, t2.root(), 10) > variation_coefficient(t1, t1.root(), 10)) ++wins;
  }
  CHECK(wins >= 18);
}
