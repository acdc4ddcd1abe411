#include "isletnet/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isletnet/errors.hpp"

namespace isletnet {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (n < 2) throw ConfigError("distance matrix needs at least 2 points");
  if (values_.size() != n * (n - 1) / 2) throw DataError("condensed distance matrix has the wrong length");
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw DataError("distances must be finite and non-negative");
  }
}

double DistanceMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (i > j) std::swap(i, j);
  return values_[index(n_, i, j)];
}

DistanceMatrix pairwise_distances(std::span<const std::vector<double>> points) {
  const std::size_t n = points.size();
  if (n < 2) throw ConfigError("pairwise distances need at least 2 points");
  std::vector<double> values;
  values.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = points[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = points[j];
      if (a.size() != b.size()) throw DataError("points differ in dimension");
      double acc = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
      }
      values.push_back(std::sqrt(acc));
    }
  }
  return DistanceMatrix(n, std::move(values));
}

DistanceMatrix pairwise_distances(const Dataset& data) {
  std::vector<std::vector<double>> points;
  points.reserve(data.size());
  for (const auto& p : data.points()) points.push_back(p.features);
  return pairwise_distances(points);
}

bool Linkage::monotone() const {
  switch (kind) {
    case LinkageKind::single:
    case LinkageKind::complete:
    case LinkageKind::average:
      return true;
    case LinkageKind::flexible:
      return alpha_i >= 0.0 && alpha_j >= 0.0 && alpha_i + alpha_j + beta >= 1.0 &&
             gamma >= -std::min(alpha_i, alpha_j);
  }
  return false;
}

std::string to_string(LinkageKind kind) {
  switch (kind) {
    case LinkageKind::single: return "single";
    case LinkageKind::complete: return "complete";
    case LinkageKind::average: return "average";
    case LinkageKind::flexible: return "flexible";
  }
  return "unknown";
}

LinkageKind parse_linkage_kind(const std::string& name) {
  if (name == "single") return LinkageKind::single;
  if (name == "complete") return LinkageKind::complete;
  if (name == "average") return LinkageKind::average;
  if (name == "flexible") return LinkageKind::flexible;
  throw ConfigError("unknown linkage '" + name + "'");
}

double lance_williams_update(double d_ki, double d_kj, double d_ij, std::size_t size_i, std::size_t size_j,
                             std::size_t /*size_k*/, const Linkage& params) {
  double ai = params.alpha_i;
  double aj = params.alpha_j;
  if (params.kind == LinkageKind::average) {
    const double total = static_cast<double>(size_i + size_j);
    ai = static_cast<double>(size_i) / total;
    aj = static_cast<double>(size_j) / total;
  }
  return ai * d_ki + aj * d_kj + params.beta * d_ij + params.gamma * std::abs(d_ki - d_kj);
}

Dendrogram::Dendrogram(std::size_t leaves, std::vector<Merge> merges) : leaves_(leaves), merges_(std::move(merges)) {
  if (leaves_ < 2) throw DataError("dendrogram needs at least 2 leaves");
  if (merges_.size() != leaves_ - 1) throw DataError("dendrogram must have exactly n-1 merges");
  parent_.assign(node_count(), node_count());
  for (std::size_t t = 0; t < merges_.size(); ++t) {
    const std::size_t id = leaves_ + t;
    const auto& m = merges_[t];
    if (m.left >= id || m.right >= id || m.left == m.right) {
      throw DataError("merge " + std::to_string(t) + " refers to an invalid child");
    }
    for (std::size_t child : {m.left, m.right}) {
      if (parent_[child] != node_count()) throw DataError("node " + std::to_string(child) + " has two parents");
      parent_[child] = id;
    }
    if (!std::isfinite(m.height) || m.height < 0.0) throw DataError("merge heights must be finite and >= 0");
    if (m.size != size(m.left) + size(m.right)) throw DataError("merge " + std::to_string(t) + " has an inconsistent size");
  }
}

void Dendrogram::check(std::size_t node) const {
  if (!contains(node)) throw ConfigError("unknown dendrogram node " + std::to_string(node));
}

const Merge& Dendrogram::merge(std::size_t node) const {
  check(node);
  if (is_leaf(node)) throw ConfigError("node " + std::to_string(node) + " is a leaf");
  return merges_[node - leaves_];
}

double Dendrogram::height(std::size_t node) const {
  check(node);
  return is_leaf(node) ? 0.0 : merges_[node - leaves_].height;
}

std::size_t Dendrogram::size(std::size_t node) const {
  check(node);
  return is_leaf(node) ? 1 : merges_[node - leaves_].size;
}

std::optional<std::size_t> Dendrogram::parent(std::size_t node) const {
  check(node);
  if (parent_[node] == node_count()) return std::nullopt;
  return parent_[node];
}

std::vector<std::size_t> Dendrogram::leaves(std::size_t node) const {
  check(node);
  std::vector<std::size_t> out;
  out.reserve(size(node));
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (is_leaf(v)) {
      out.push_back(v);
    } else {
      const auto& m = merges_[v - leaves_];
      stack.push_back(m.right);
      stack.push_back(m.left);
    }
  }
  return out;
}

std::vector<std::size_t> Dendrogram::internal_nodes(std::size_t node) const {
  check(node);
  std::vector<std::size_t> out;
  if (is_leaf(node)) return out;
  out.reserve(size(node) - 1);
  std::vector<std::size_t> stack{node};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    out.push_back(v);
    const auto& m = merges_[v - leaves_];
    if (!is_leaf(m.right)) stack.push_back(m.right);
    if (!is_leaf(m.left)) stack.push_back(m.left);
  }
  return out;
}

Dendrogram build_dendrogram(const DistanceMatrix& dist, const Linkage& params) {
  const std::size_t n = dist.size();
  if (n < 2) throw ConfigError("dendrogram needs at least 2 points");

  // Slots index the working matrix; node[s] is the creation id of the
  // cluster currently stored in slot s.
  std::vector<double> d = dist.values();
  auto at = [&](std::size_t a, std::size_t b) -> double& {
    if (a > b) std::swap(a, b);
    return d[DistanceMatrix::index(n, a, b)];
  };
  std::vector<std::size_t> node(n);
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);
  for (std::size_t s = 0; s < n; ++s) node[s] = s;

  // Nearest active neighbour of each slot; equal distances prefer the
  // neighbour with the smaller creation id.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> nn(n, n);
  std::vector<double> nn_dist(n, inf);
  auto refresh = [&](std::size_t a) {
    nn[a] = n;
    nn_dist[a] = inf;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a || !active[b]) continue;
      const double v = at(a, b);
      if (v < nn_dist[a] || (v == nn_dist[a] && nn[a] != n && node[b] < node[nn[a]]) || nn[a] == n) {
        nn[a] = b;
        nn_dist[a] = v;
      }
    }
  };
  for (std::size_t a = 0; a < n; ++a) refresh(a);

  std::vector<Merge> merges;
  merges.reserve(n - 1);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    // The lexicographically smallest closest pair is always some slot's
    // cached neighbour pair.
    std::size_t best = n;
    std::size_t best_lo = 0;
    std::size_t best_hi = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      const std::size_t lo = std::min(node[a], node[nn[a]]);
      const std::size_t hi = std::max(node[a], node[nn[a]]);
      if (best == n || nn_dist[a] < nn_dist[best] ||
          (nn_dist[a] == nn_dist[best] && (lo < best_lo || (lo == best_lo && hi < best_hi)))) {
        best = a;
        best_lo = lo;
        best_hi = hi;
      }
    }
    std::size_t i = best;
    std::size_t j = nn[best];
    if (node[i] > node[j]) std::swap(i, j);
    const double h = at(i, j);
    merges.push_back({node[i], node[j], h, size[i] + size[j]});

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == i || k == j) continue;
      at(k, i) = lance_williams_update(at(k, i), at(k, j), h, size[i], size[j], size[k], params);
    }
    active[j] = 0;
    size[i] += size[j];
    node[i] = n + t;

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == i) continue;
      if (nn[k] == i || nn[k] == j) {
        refresh(k);
      } else if (at(k, i) < nn_dist[k]) {
        nn[k] = i;
        nn_dist[k] = at(k, i);
      }
    }
    refresh(i);
  }
  return Dendrogram(n, std::move(merges));
}

std::vector<double> subtree_heights(const Dendrogram& tree, std::size_t node) {
  std::vector<double> out;
  for (auto v : tree.internal_nodes(node)) out.push_back(tree.height(v));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace isletnet
