#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "isletnet/hierarchy.hpp"

namespace isletnet {

// Equal-width histogram over [min, max] of a set of heights. The maximum
// lands in the last bin; a zero-width range puts everything in bin 0.
struct HeightHistogram {
  std::vector<std::size_t> bar_counts;
  double min = 0.0;
  double max = 0.0;

  static HeightHistogram build(std::span<const double> heights, std::size_t bins);
};

struct CutConfig {
  double alpha = 1.0;
  std::size_t bins = 40;
  // Subtrees with fewer internal nodes are kept whole without testing.
  std::size_t min_nodes = 2;

  void validate() const;
};

struct Cluster {
  std::size_t node = 0;  // dendrogram node whose leaves form the cluster
  std::vector<std::size_t> members;
};

struct Clustering {
  std::vector<Cluster> clusters;

  std::size_t point_count() const;
  // Cluster index of every point; throws if the clusters are not a partition
  // of 0..n-1.
  std::vector<std::size_t> assignment(std::size_t n) const;
};

// Population standard deviation of the histogram bars over their mean.
// Defined as 0 when every height is equal.
double variation_coefficient(std::span<const double> heights, std::size_t bins);
double variation_coefficient(const Dendrogram& tree, std::size_t node, std::size_t bins);

struct GapCut {
  double threshold = 0.0;
  std::vector<std::size_t> roots;
};

// Sorts the subtree heights, finds the widest gap between consecutive values
// (the higher one on ties) and removes every node at or above the upper end
// of that gap. `node` itself is always removed, so a single-merge subtree
// splits into its two children.
GapCut gap_cut(const Dendrogram& tree, std::size_t node);

// Multi-level hierarchical clustering. A gap cut at a father node is kept only
// if no resulting subtree has a variation coefficient above alpha times the
// father's; otherwise the father's leaves form one cluster. Accepted subtrees
// are explored the same way.
Clustering multilevel_cut(const Dendrogram& tree, const CutConfig& config);

// Undoes the last k-1 merges.
Clustering single_cut_baseline(const Dendrogram& tree, std::size_t k);

using ClusteringQuality = std::function<double(const Clustering&, std::span<const int> labels)>;

struct AlphaSearch {
  double alpha_hi = 10.0;
  std::size_t iterations = 8;
};

// Dichotomic search on [0, alpha_hi], starting from alpha_hi. Each step
// evaluates the midpoint of the current interval; if it is at least as good
// as the best value so far it becomes the best and the search continues in
// the lower half, otherwise in the upper half.
double search_alpha(const Dendrogram& tree, std::span<const int> labels, const ClusteringQuality& quality,
                    const CutConfig& base, const AlphaSearch& search);

}  // namespace isletnet
