#include <doctest.h>

#include <algorithm>

#include "isletnet/errors.hpp"
#include "isletnet/islet.hpp"
#include "oracles.hpp"

using namespace isletnet;

namespace {

// Caterpillar tree over n leaves: ((((0,1),2),3),...).
Dendrogram chain(std::size_t n) {
  std::vector<Merge> merges{{0, 1, 1.0, 2}};
  for (std::size_t t = 1; t + 1 < n; ++t) merges.push_back({t + 1, n + t - 1, 1.0 + static_cast<double>(t), t + 2});
  return Dendrogram(n, merges);
}

// Two balanced halves of `half` leaves each joined at the root.
Dendrogram two_branches(std::size_t half) {
  const std::size_t n = 2 * half;
  std::vector<Merge> merges;
  auto grow = [&](std::size_t first) {
    std::size_t node = first;
    for (std::size_t i = 1; i < half; ++i) {
      merges.push_back({first + i, node, static_cast<double>(i), i + 1});
      node = n + merges.size() - 1;
    }
    return node;
  };
  const auto a = grow(0);
  const auto b = grow(half);
  merges.push_back({a, b, 100.0, n});
  // children must precede parents; both chains were appended in order
  return Dendrogram(n, merges);
}

Clustering whole(const Dendrogram& tree) {
  auto members = tree.leaves(tree.root());
  std::sort(members.begin(), members.end());
  return {{{tree.root(), members}}};
}

}  // namespace

TEST_CASE("pure cluster above the size gate is one islet") {
  const auto tree = chain(20);
  const std::vector<int> labels(20, 4);
  const auto p = detect_islets(tree, whole(tree), labels, {15});
  REQUIRE(p.islets.size() == 1);
  CHECK(p.islets[0].members.size() == 20);
  CHECK(p.islets[0].label == 4);
  CHECK(p.residual.empty());
  CHECK(islet_coverage(p) == 1.0);
}

TEST_CASE("small pure cluster goes to the residual") {
  const auto tree = chain(10);
  const std::vector<int> labels(10, 0);
  const auto p = detect_islets(tree, whole(tree), labels, {15});
  CHECK(p.islets.empty());
  CHECK(p.residual.size() == 10);
  CHECK(islet_coverage(p) == 0.0);
}

TEST_CASE("impure cluster is searched for pure subtrees") {
  const auto tree = two_branches(10);
  std::vector<int> labels(20, 0);
  std::fill(labels.begin() + 10, labels.end(), 1);
  const auto p = detect_islets(tree, whole(tree), labels, {5});
  REQUIRE(p.islets.size() == 2);
  CHECK(p.islets[0].members.size() == 10);
  CHECK(p.islets[1].members.size() == 10);
  CHECK(p.islets[0].label != p.islets[1].label);
  CHECK(p.residual.empty());
  check_islet_partition(p, labels, {5});
}

TEST_CASE("islet coverage arithmetic") {
  IsletPartition p;
  p.islets.push_back({std::vector<std::size_t>(76), 0, 0});
  p.residual.resize(24);
  CHECK(islet_coverage(p) == doctest::Approx(0.76));
}

TEST_CASE("mismatched inputs are rejected") {
  const auto tree = chain(6);
  CHECK_THROWS_AS(detect_islets(tree, whole(tree), std::vector<int>(5, 0), {1}), DataError);
  Clustering bad{{{tree.root(), {0, 1, 2}}}};
  CHECK_THROWS_AS(detect_islets(tree, bad, std::vector<int>(6, 0), {1}), DataError);
  CHECK_THROWS_AS(IsletConfig{0}.validate(), ConfigError);
}

TEST_CASE("islets are pure, large, maximal and partition the points") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tree = oracle::random_dendrogram(80, 2, seed, Linkage::flexible(0.0));
    std::vector<int> labels(80);
    const auto pts = oracle::random_points(80, 2, seed);
    for (std::size_t i = 0; i < 80; ++i) labels[i] = pts[i][0] < 5.0 ? 0 : (pts[i][1] < 5.0 ? 1 : 2);
    const auto clustering = multilevel_cut(tree, {1.0, 10, 2});
    double previous = 1.0;
    for (std::size_t P : {1u, 3u, 5u, 10u, 20u}) {
      const auto p = detect_islets(tree, clustering, labels, {P});
      check_islet_partition(p, labels, {P});
      for (const auto& islet : p.islets) {
        // growing the islet one level up would break purity or leave its cluster
        const auto parent = tree.parent(islet.node);
        if (!parent) continue;
        const auto up = tree.leaves(*parent);
        const bool pure = std::all_of(up.begin(), up.end(), [&](std::size_t id) { return labels[id] == islet.label; });
        const bool inside_cluster =
            std::any_of(clustering.clusters.begin(), clustering.clusters.end(), [&](const Cluster& c) {
              return std::find(c.members.begin(), c.members.end(), up.front()) != c.members.end() &&
                     c.members.size() >= up.size() &&
                     std::all_of(up.begin(), up.end(), [&](std::size_t id) {
                       return std::find(c.members.begin(), c.members.end(), id) != c.members.end();
                     });
            });
        CHECK_FALSE((pure && inside_cluster));
      }
      const double coverage = islet_coverage(p);
      CHECK(coverage <= previous);
      previous = coverage;
    }
  }
}

TEST_CASE("partition checker catches violations") {
  const std::vector<int> labels{0, 0, 1, 1};
  IsletPartition impure{{{{0, 2}, 0, 0}}, {1, 3}};
  CHECK_THROWS_AS(check_islet_partition(impure, labels, {1}), InvariantError);
  IsletPartition small{{{{0, 1}, 0, 0}}, {2, 3}};
  CHECK_THROWS_AS(check_islet_partition(small, labels, {3}), InvariantError);
  IsletPartition missing{{{{0, 1}, 0, 0}}, {2}};
  CHECK_THROWS_AS(check_islet_partition(missing, labels, {1}), InvariantError);
  IsletPartition twice{{{{0, 1}, 0, 0}}, {1, 2, 3}};
  CHECK_THROWS_AS(check_islet_partition(twice, labels, {1}), InvariantError);
}
