#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "isletnet/hierarchy.hpp"
#include "isletnet/multicut.hpp"

namespace isletnet {

struct IsletConfig {
  std::size_t min_size = 15;

  void validate() const;
};

struct Islet {
  std::vector<std::size_t> members;  // ascending
  int label = 0;
  std::size_t node = 0;
};

struct IsletPartition {
  std::vector<Islet> islets;
  std::vector<std::size_t> residual;  // ascending

  std::size_t point_count() const;
  std::size_t islet_member_count() const;
};

// A pure cluster of at least min_size points is an islet. An impure cluster is
// searched for its maximal pure subtrees; those with at least min_size leaves
// become islets. Everything else is residual.
IsletPartition detect_islets(const Dendrogram& tree, const Clustering& clustering, std::span<const int> labels,
                             const IsletConfig& config);

// Fraction of points that ended up in an islet.
double islet_coverage(const IsletPartition& partition);

// Throws InvariantError unless every islet is pure, large enough, and islets
// plus residual partition 0..n-1.
void check_islet_partition(const IsletPartition& partition, std::span<const int> labels, const IsletConfig& config);

// Clustering quality for search_alpha: islet coverage at the given size gate.
ClusteringQuality islet_coverage_quality(const Dendrogram& tree, IsletConfig config);

}  // namespace isletnet
