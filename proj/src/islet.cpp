#include "isletnet/islet.hpp"

#include <algorithm>

#include "isletnet/errors.hpp"

namespace isletnet {

namespace {

constexpr int kMixed = -1;

// Label shared by every leaf under each node, or kMixed.
std::vector<int> node_labels(const Dendrogram& tree, std::span<const int> labels) {
  std::vector<int> out(tree.node_count());
  for (std::size_t i = 0; i < tree.leaf_count(); ++i) out[i] = labels[i];
  for (std::size_t t = 0; t < tree.merges().size(); ++t) {
    const auto& m = tree.merges()[t];
    const int a = out[m.left];
    out[tree.leaf_count() + t] = (a != kMixed && a == out[m.right]) ? a : kMixed;
  }
  return out;
}

Islet make_islet(const Dendrogram& tree, std::size_t node, int label) {
  auto members = tree.leaves(node);
  std::sort(members.begin(), members.end());
  return {std::move(members), label, node};
}

}  // namespace

void IsletConfig::validate() const {
  if (min_size < 1) throw ConfigError("islet min_size must be >= 1");
}

std::size_t IsletPartition::islet_member_count() const {
  std::size_t n = 0;
  for (const auto& islet : islets) n += islet.members.size();
  return n;
}

std::size_t IsletPartition::point_count() const { return islet_member_count() + residual.size(); }

IsletPartition detect_islets(const Dendrogram& tree, const Clustering& clustering, std::span<const int> labels,
                             const IsletConfig& config) {
  config.validate();
  const std::size_t n = tree.leaf_count();
  if (labels.size() != n) throw DataError("labels do not cover the dendrogram leaves");
  if (clustering.point_count() != n) throw DataError("clustering does not cover the dendrogram leaves");
  clustering.assignment(n);

  const auto pure = node_labels(tree, labels);
  IsletPartition out;
  for (const auto& cluster : clustering.clusters) {
    if (!tree.contains(cluster.node) || tree.size(cluster.node) != cluster.members.size()) {
      throw DataError("cluster provenance node " + std::to_string(cluster.node) + " does not match its members");
    }
    std::vector<std::size_t> stack{cluster.node};
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      if (pure[u] != kMixed) {
        if (tree.size(u) >= config.min_size) {
          out.islets.push_back(make_islet(tree, u, pure[u]));
        } else {
          const auto leaves = tree.leaves(u);
          out.residual.insert(out.residual.end(), leaves.begin(), leaves.end());
        }
        continue;
      }
      const auto& m = tree.merge(u);
      stack.push_back(m.right);
      stack.push_back(m.left);
    }
  }
  std::sort(out.residual.begin(), out.residual.end());
  return out;
}

double islet_coverage(const IsletPartition& partition) {
  const std::size_t total = partition.point_count();
  if (total == 0) return 0.0;
  return static_cast<double>(partition.islet_member_count()) / static_cast<double>(total);
}

void check_islet_partition(const IsletPartition& partition, std::span<const int> labels, const IsletConfig& config) {
  const std::size_t n = labels.size();
  std::vector<char> seen(n, 0);
  auto claim = [&](std::size_t id) {
    if (id >= n) throw InvariantError("islet partition refers to unknown point " + std::to_string(id));
    if (seen[id]) throw InvariantError("point " + std::to_string(id) + " appears twice in the islet partition");
    seen[id] = 1;
  };
  for (std::size_t i = 0; i < partition.islets.size(); ++i) {
    const auto& islet = partition.islets[i];
    if (islet.members.size() < config.min_size) {
      throw InvariantError("islet " + std::to_string(i) + " is smaller than the minimum size");
    }
    for (auto id : islet.members) {
      claim(id);
      if (labels[id] != islet.label) throw InvariantError("islet " + std::to_string(i) + " is impure");
    }
  }
  for (auto id : partition.residual) claim(id);
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InvariantError("islets and residual do not cover every point");
  }
}

ClusteringQuality islet_coverage_quality(const Dendrogram& tree, IsletConfig config) {
  return [&tree, config](const Clustering& clustering, std::span<const int> labels) {
    return islet_coverage(detect_islets(tree, clustering, labels, config));
  };
}

}  // namespace isletnet
