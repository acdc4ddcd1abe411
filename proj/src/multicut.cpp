#include "isletnet/multicut.hpp"

#include <algorithm>
#include <cmath>

#include "isletnet/errors.hpp"

namespace isletnet {

HeightHistogram HeightHistogram::build(std::span<const double> heights, std::size_t bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  if (heights.empty()) throw ConfigError("histogram of an empty height set");
  HeightHistogram h;
  h.bar_counts.assign(bins, 0);
  const auto [lo, hi] = std::minmax_element(heights.begin(), heights.end());
  h.min = *lo;
  h.max = *hi;
  const double range = h.max - h.min;
  for (double v : heights) {
    std::size_t bin = 0;
    if (range > 0.0) {
      const double pos = (v - h.min) * static_cast<double>(bins) / range;
      bin = std::min(static_cast<std::size_t>(pos), bins - 1);
    }
    ++h.bar_counts[bin];
  }
  return h;
}

void CutConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (bins < 2) throw ConfigError("bins must be >= 2");
  if (min_nodes < 2) throw ConfigError("min_nodes must be >= 2");
}

std::size_t Clustering::point_count() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.members.size();
  return n;
}

std::vector<std::size_t> Clustering::assignment(std::size_t n) const {
  constexpr auto unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> out(n, unset);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto id : clusters[c].members) {
      if (id >= n) throw DataError("cluster member " + std::to_string(id) + " is out of range");
      if (out[id] != unset) throw DataError("point " + std::to_string(id) + " belongs to two clusters");
      out[id] = c;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out[i] == unset) throw DataError("point " + std::to_string(i) + " is in no cluster");
  }
  return out;
}

double variation_coefficient(std::span<const double> heights, std::size_t bins) {
  if (heights.size() < 2) throw ConfigError("variation coefficient needs at least 2 heights");
  if (bins < 2) throw ConfigError("variation coefficient needs at least 2 bins");
  const auto hist = HeightHistogram::build(heights, bins);
  if (hist.max == hist.min) return 0.0;
  const double mean = static_cast<double>(heights.size()) / static_cast<double>(bins);
  double ss = 0.0;
  for (auto c : hist.bar_counts) {
    const double diff = static_cast<double>(c) - mean;
    ss += diff * diff;
  }
  return std::sqrt(ss / static_cast<double>(bins)) / mean;
}

double variation_coefficient(const Dendrogram& tree, std::size_t node, std::size_t bins) {
  const auto heights = subtree_heights(tree, node);
  if (heights.size() < 2) {
    throw ConfigError("subtree at node " + std::to_string(node) + " has fewer than 2 internal nodes");
  }
  return variation_coefficient(heights, bins);
}

GapCut gap_cut(const Dendrogram& tree, std::size_t node) {
  const auto v = subtree_heights(tree, node);
  if (v.empty()) throw ConfigError("gap cut of a leaf");
  // A single merge has no gap; removing it is the only possible cut.
  std::size_t upper = 0;
  double widest = -1.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double gap = v[i] - v[i - 1];
    if (gap >= widest) {
      widest = gap;
      upper = i;
    }
  }
  GapCut cut;
  cut.threshold = v[upper];
  std::vector<std::size_t> stack{node};
  bool top = true;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    if (!tree.is_leaf(u) && (top || tree.height(u) >= cut.threshold)) {
      const auto& m = tree.merge(u);
      stack.push_back(m.right);
      stack.push_back(m.left);
    } else {
      cut.roots.push_back(u);
    }
    top = false;
  }
  return cut;
}

namespace {

Cluster make_cluster(const Dendrogram& tree, std::size_t node) {
  auto members = tree.leaves(node);
  std::sort(members.begin(), members.end());
  return {node, std::move(members)};
}

void sort_clusters(Clustering& c) {
  std::sort(c.clusters.begin(), c.clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
}

}  // namespace

Clustering multilevel_cut(const Dendrogram& tree, const CutConfig& config) {
  config.validate();
  if (tree.leaf_count() < 2) throw ConfigError("multilevel cut needs at least 2 leaves");

  auto testable = [&](std::size_t node) { return tree.size(node) - 1 >= config.min_nodes; };

  Clustering out;
  std::vector<std::size_t> fathers{tree.root()};
  while (!fathers.empty()) {
    const auto father = fathers.back();
    fathers.pop_back();
    if (!testable(father)) {
      out.clusters.push_back(make_cluster(tree, father));
      continue;
    }
    const auto heights = subtree_heights(tree, father);
    if (heights.front() == heights.back()) {
      out.clusters.push_back(make_cluster(tree, father));
      continue;
    }
    const double father_cv = variation_coefficient(heights, config.bins);
    const auto cut = gap_cut(tree, father);
    bool valid = true;
    for (auto sub : cut.roots) {
      if (testable(sub) && variation_coefficient(tree, sub, config.bins) > config.alpha * father_cv) {
        valid = false;
        break;
      }
    }
    if (!valid) {
      out.clusters.push_back(make_cluster(tree, father));
      continue;
    }
    for (auto it = cut.roots.rbegin(); it != cut.roots.rend(); ++it) {
      if (testable(*it)) {
        fathers.push_back(*it);
      } else {
        out.clusters.push_back(make_cluster(tree, *it));
      }
    }
  }
  sort_clusters(out);
  return out;
}

Clustering single_cut_baseline(const Dendrogram& tree, std::size_t k) {
  const std::size_t n = tree.leaf_count();
  if (k < 1 || k > n) throw ConfigError("cluster count k must be in [1, n]");
  const std::size_t first_removed = tree.node_count() - (k - 1);
  Clustering out;
  std::vector<std::size_t> stack{tree.root()};
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    if (u >= first_removed) {
      const auto& m = tree.merge(u);
      stack.push_back(m.right);
      stack.push_back(m.left);
    } else {
      out.clusters.push_back(make_cluster(tree, u));
    }
  }
  sort_clusters(out);
  return out;
}

double search_alpha(const Dendrogram& tree, std::span<const int> labels, const ClusteringQuality& quality,
                    const CutConfig& base, const AlphaSearch& search) {
  if (!(search.alpha_hi > 0.0)) throw ConfigError("alpha_hi must be > 0");
  if (search.iterations < 1) throw ConfigError("alpha search needs at least one iteration");
  if (labels.size() != tree.leaf_count()) throw DataError("labels do not cover the dendrogram leaves");

  auto evaluate = [&](double alpha) {
    CutConfig cfg = base;
    cfg.alpha = alpha;
    return quality(multilevel_cut(tree, cfg), labels);
  };

  double lo = 0.0;
  double hi = search.alpha_hi;
  double best = hi;
  double best_quality = evaluate(hi);
  for (std::size_t it = 0; it < search.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double q = evaluate(mid);
    if (q >= best_quality) {
      best = mid;
      best_quality = q;
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return best;
}

}  // namespace isletnet
