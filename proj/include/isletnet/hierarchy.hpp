#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isletnet/dataset.hpp"

namespace isletnet {

// Condensed upper triangle of a symmetric distance matrix (i < j, row-major).
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const;
  const std::vector<double>& values() const { return values_; }

  static std::size_t index(std::size_t n, std::size_t i, std::size_t j) {
    return n * i - i * (i + 1) / 2 + (j - i - 1);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

DistanceMatrix pairwise_distances(const Dataset& data);
DistanceMatrix pairwise_distances(std::span<const std::vector<double>> points);

enum class LinkageKind { single, complete, average, flexible };

// Lance-Williams coefficients. For `average` the alphas are derived from the
// cluster sizes at update time and the stored alphas are ignored.
struct Linkage {
  LinkageKind kind = LinkageKind::flexible;
  double alpha_i = 0.5;
  double alpha_j = 0.5;
  double beta = 0.0;
  double gamma = 0.0;

  static Linkage single() { return {LinkageKind::single, 0.5, 0.5, 0.0, -0.5}; }
  static Linkage complete() { return {LinkageKind::complete, 0.5, 0.5, 0.0, 0.5}; }
  static Linkage average() { return {LinkageKind::average, 0.5, 0.5, 0.0, 0.0}; }
  static Linkage flexible(double beta) { return {LinkageKind::flexible, (1.0 - beta) / 2.0, (1.0 - beta) / 2.0, beta, 0.0}; }

  // Merge heights never decrease towards the root.
  bool monotone() const;
};

std::string to_string(LinkageKind kind);
LinkageKind parse_linkage_kind(const std::string& name);

// Distance from cluster k to the union of clusters i and j.
double lance_williams_update(double d_ki, double d_kj, double d_ij, std::size_t size_i, std::size_t size_j,
                             std::size_t size_k, const Linkage& params);

struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

// Binary merge tree. Nodes 0..n-1 are the leaves (point ids); node n+t is the
// t-th merge, so children always have smaller ids than their parent and the
// root is node 2n-2.
class Dendrogram {
 public:
  Dendrogram() = default;
  Dendrogram(std::size_t leaves, std::vector<Merge> merges);

  std::size_t leaf_count() const { return leaves_; }
  std::size_t node_count() const { return leaves_ == 0 ? 0 : 2 * leaves_ - 1; }
  std::size_t root() const { return node_count() - 1; }
  bool is_leaf(std::size_t node) const { return node < leaves_; }
  bool contains(std::size_t node) const { return node < node_count(); }

  const std::vector<Merge>& merges() const { return merges_; }
  const Merge& merge(std::size_t node) const;
  double height(std::size_t node) const;
  std::size_t size(std::size_t node) const;
  std::optional<std::size_t> parent(std::size_t node) const;

  // Leaf ids under `node`, left to right.
  std::vector<std::size_t> leaves(std::size_t node) const;
  // Internal nodes of the subtree, parents before children.
  std::vector<std::size_t> internal_nodes(std::size_t node) const;

 private:
  void check(std::size_t node) const;

  std::size_t leaves_ = 0;
  std::vector<Merge> merges_;
  std::vector<std::size_t> parent_;
};

// Agglomerates the closest pair of active clusters until one remains,
// updating distances with the Lance-Williams recurrence. Equal distances are
// resolved towards the lexicographically smallest (creation id, creation id)
// pair; the merged cluster keeps the smaller id as its left child.
Dendrogram build_dendrogram(const DistanceMatrix& dist, const Linkage& params);

// Heights of the internal nodes below and including `node`, ascending.
std::vector<double> subtree_heights(const Dendrogram& tree, std::size_t node);

}  // namespace isletnet
