#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "isletnet/dataset.hpp"

namespace isletnet {

// Points searched by the k-NN. Ids are those of the dataset the points were
// taken from and serve as the tie-break between equal distances.
class ReferenceSet {
 public:
  ReferenceSet() = default;
  explicit ReferenceSet(std::vector<LabeledPoint> points);
  static ReferenceSet from(const Dataset& data);
  static ReferenceSet from(const Dataset& data, std::span<const std::size_t> ids);

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<LabeledPoint>& points() const { return points_; }

 private:
  std::vector<LabeledPoint> points_;
  std::size_t dim_ = 0;
};

struct Neighbor {
  std::size_t id = 0;
  double distance = 0.0;
  int label = 0;
};

// The k closest reference points, nearest first; equal distances are ordered
// by id.
std::vector<Neighbor> nearest(const ReferenceSet& refs, std::span<const double> query, std::size_t k);

enum class DecisionSource { none, network, knn };

struct Decision {
  bool accepted = false;
  int label = -1;
  DecisionSource source = DecisionSource::none;
  std::size_t network = 0;  // meaningful when source == network

  static Decision reject(DecisionSource source) { return {false, -1, source, 0}; }
};

enum class KnnMode { unanimity, majority };

// Unanimity accepts only when every neighbour agrees. Majority accepts the
// most frequent label and rejects ties for first place.
Decision decide_from_neighbors(std::span<const Neighbor> neighbors, KnnMode mode);
Decision knn_decide(const ReferenceSet& refs, std::span<const double> query, std::size_t k, KnnMode mode);

}  // namespace isletnet
