#include "isletnet/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "isletnet/errors.hpp"

namespace isletnet {

ReferenceSet::ReferenceSet(std::vector<LabeledPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw ConfigError("reference set is empty");
  dim_ = points_.front().features.size();
  if (dim_ == 0) throw DataError("reference points have no features");
  for (const auto& p : points_) {
    if (p.features.size() != dim_) throw DataError("reference points differ in dimension");
  }
}

ReferenceSet ReferenceSet::from(const Dataset& data) { return ReferenceSet(data.points()); }

ReferenceSet ReferenceSet::from(const Dataset& data, std::span<const std::size_t> ids) {
  std::vector<LabeledPoint> points;
  points.reserve(ids.size());
  for (auto id : ids) {
    if (id >= data.size()) throw DataError("reference id " + std::to_string(id) + " is out of range");
    points.push_back(data[id]);
  }
  return ReferenceSet(std::move(points));
}

std::vector<Neighbor> nearest(const ReferenceSet& refs, std::span<const double> query, std::size_t k) {
  if (k < 1 || k > refs.size()) {
    throw ConfigError("k = " + std::to_string(k) + " is outside [1, " + std::to_string(refs.size()) + "]");
  }
  if (query.size() != refs.dim()) throw DataError("query dimension does not match the reference set");

  std::vector<Neighbor> all;
  all.reserve(refs.size());
  for (const auto& p : refs.points()) {
    double acc = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) {
      const double diff = p.features[d] - query[d];
      acc += diff * diff;
    }
    all.push_back({p.id, acc, p.label});
  }
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  for (auto& nb : all) nb.distance = std::sqrt(nb.distance);
  return all;
}

Decision decide_from_neighbors(std::span<const Neighbor> neighbors, KnnMode mode) {
  if (neighbors.empty()) throw ConfigError("no neighbours to decide from");
  if (mode == KnnMode::unanimity) {
    const int label = neighbors.front().label;
    for (const auto& nb : neighbors) {
      if (nb.label != label) return Decision::reject(DecisionSource::knn);
    }
    return {true, label, DecisionSource::knn, 0};
  }
  std::map<int, std::size_t> votes;
  for (const auto& nb : neighbors) ++votes[nb.label];
  int best = -1;
  std::size_t best_votes = 0;
  bool tied = false;
  for (const auto& [label, count] : votes) {
    if (count > best_votes) {
      best = label;
      best_votes = count;
      tied = false;
    } else if (count == best_votes) {
      tied = true;
    }
  }
  if (tied) return Decision::reject(DecisionSource::knn);
  return {true, best, DecisionSource::knn, 0};
}

Decision knn_decide(const ReferenceSet& refs, std::span<const double> query, std::size_t k, KnnMode mode) {
  const auto nb = nearest(refs, query, k);
  return decide_from_neighbors(nb, mode);
}

}  // namespace isletnet
