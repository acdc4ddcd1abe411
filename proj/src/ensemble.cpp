#include "isletnet/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "isletnet/errors.hpp"

namespace isletnet {

std::string to_string(RefsetChoice choice) { return choice == RefsetChoice::full ? "full" : "residual"; }

RefsetChoice parse_refset_choice(const std::string& name) {
  if (name == "full") return RefsetChoice::full;
  if (name == "residual") return RefsetChoice::residual;
  throw ConfigError("unknown reference set '" + name + "' (expected full or residual)");
}

void PipelineConfig::validate() const {
  cut.validate();
  islets.validate();
  train.validate();
  if (ladder.empty()) throw ConfigError("architecture ladder is empty");
  for (const auto& rung : ladder) {
    if (rung.empty()) throw ConfigError("ladder rungs need at least one hidden layer");
    Layout{1, rung, 1}.validate();
  }
  if (alpha_search) {
    if (!(alpha_search->alpha_hi > 0.0)) throw ConfigError("alpha_hi must be > 0");
    if (alpha_search->iterations < 1) throw ConfigError("alpha search needs at least one iteration");
  }
  if (!(negative_ratio >= 0.0) || !std::isfinite(negative_ratio)) throw ConfigError("negative_ratio must be >= 0");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must be in [0, 1]");
}

void ModularClassifier::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must be in [0, 1]");
  if (k < 1 || k > refset.size()) throw ConfigError("k must be in [1, reference set size]");
  for (const auto& n : networks) {
    n.network.validate();
    if (n.network.layout.inputs != refset.dim() || n.network.layout.outputs != 1) {
      throw DataError("islet network does not match the reference set dimension");
    }
    if (n.label < 0 || static_cast<std::size_t>(n.label) >= class_names.size()) {
      throw DataError("islet network has an unknown label");
    }
  }
}

namespace {

std::vector<std::vector<double>> gather(const Dataset& data, std::span<const std::size_t> ids) {
  std::vector<std::vector<double>> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(data[id].features);
  return out;
}

}  // namespace

BuildResult build(const Dataset& train, const PipelineConfig& config) {
  config.validate();
  if (train.size() < 2) throw DataError("training set needs at least 2 points");
  if (train.classes().size() < 2) throw DataError("training set needs at least 2 classes");

  BuildResult out;
  const auto labels = train.labels();
  out.tree = build_dendrogram(pairwise_distances(train), config.linkage);

  CutConfig cut = config.cut;
  if (config.alpha_search) {
    cut.alpha = search_alpha(out.tree, labels, islet_coverage_quality(out.tree, config.islets), cut,
                             *config.alpha_search);
  }
  out.alpha = cut.alpha;
  out.clustering = multilevel_cut(out.tree, cut);
  out.partition = detect_islets(out.tree, out.clustering, labels, config.islets);
  check_islet_partition(out.partition, labels, config.islets);

  auto& clf = out.classifier;
  for (std::size_t i = 0; i < out.partition.islets.size(); ++i) {
    const auto& islet = out.partition.islets[i];
    std::vector<char> member(train.size(), 0);
    for (auto id : islet.members) member[id] = 1;
    std::vector<std::size_t> negative_ids;
    for (std::size_t id = 0; id < train.size(); ++id) {
      if (!member[id]) negative_ids.push_back(id);
    }
    if (config.negative_ratio > 0.0) {
      const auto keep = static_cast<std::size_t>(std::ceil(config.negative_ratio * static_cast<double>(islet.members.size())));
      if (keep < negative_ids.size()) {
        std::mt19937_64 rng(derive_seed(config.seed, 1'000'000 + i));
        std::shuffle(negative_ids.begin(), negative_ids.end(), rng);
        negative_ids.resize(keep);
        std::sort(negative_ids.begin(), negative_ids.end());
      }
    }
    const auto positives = gather(train, islet.members);
    const auto negatives = gather(train, negative_ids);
    TrainParams params = config.train;
    params.seed = derive_seed(config.seed, i);
    auto result = escalate_architecture(positives, negatives, config.ladder, params);
    clf.networks.push_back({result.network, islet.label, result.converged, result.rung});
    out.escalations.push_back(std::move(result));
  }
  out.knn_only = clf.networks.empty();

  clf.refset_choice = config.refset;
  if (config.refset == RefsetChoice::residual && out.partition.residual.size() >= config.k) {
    clf.refset = ReferenceSet::from(train, out.partition.residual);
  } else {
    out.refset_fallback = config.refset == RefsetChoice::residual;
    clf.refset = ReferenceSet::from(train);
  }
  if (config.k > clf.refset.size()) throw ConfigError("k is larger than the training set");
  clf.k = config.k;
  clf.theta = config.theta;
  clf.max_output_tiebreak = config.max_output_tiebreak;
  clf.class_names = train.class_names();
  return out;
}

Decision cooperate(std::span<const double> outputs, std::span<const int> labels, double theta, bool max_output_tiebreak,
                   const std::function<Decision()>& fallback) {
  if (outputs.size() != labels.size()) throw ConfigError("one label per network output is required");
  std::size_t fired = 0;
  std::size_t winner = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i] >= theta) {
      if (fired == 0 || outputs[i] > outputs[winner]) winner = i;
      ++fired;
    }
  }
  if (fired == 1 || (fired > 1 && max_output_tiebreak)) {
    return {true, labels[winner], DecisionSource::network, winner};
  }
  return fallback();
}

std::vector<double> network_outputs(const ModularClassifier& clf, std::span<const double> x) {
  std::vector<double> out;
  out.reserve(clf.networks.size());
  for (const auto& n : clf.networks) out.push_back(forward(n.network, x)[0]);
  return out;
}

namespace {

std::vector<int> network_labels(const ModularClassifier& clf) {
  std::vector<int> out;
  for (const auto& n : clf.networks) out.push_back(n.label);
  return out;
}

void check_test(const Dataset& test, std::size_t dim) {
  if (test.empty()) throw DataError("test set is empty");
  if (test.dim() != dim) {
    throw DataError("test set has dimension " + std::to_string(test.dim()) + ", expected " + std::to_string(dim));
  }
}

}  // namespace

Decision classify(const ModularClassifier& clf, std::span<const double> x) {
  if (x.size() != clf.refset.dim()) throw DataError("query dimension does not match the classifier");
  const auto outputs = network_outputs(clf, x);
  const auto labels = network_labels(clf);
  return cooperate(outputs, labels, clf.theta, clf.max_output_tiebreak,
                   [&] { return knn_decide(clf.refset, x, clf.k, KnnMode::unanimity); });
}

Rates score(std::span<const Decision> decisions, std::span<const int> truth) {
  if (decisions.empty()) throw DataError("nothing to score");
  if (decisions.size() != truth.size()) throw ConfigError("decisions and labels differ in count");
  std::size_t correct = 0;
  std::size_t wrong = 0;
  std::size_t rejected = 0;
  std::size_t by_network = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    if (!d.accepted) {
      ++rejected;
    } else if (d.label == truth[i]) {
      ++correct;
    } else {
      ++wrong;
    }
    if (d.source == DecisionSource::network) ++by_network;
  }
  const double n = static_cast<double>(decisions.size());
  return {100.0 * static_cast<double>(correct) / n, 100.0 * static_cast<double>(wrong) / n,
          100.0 * static_cast<double>(rejected) / n, 100.0 * static_cast<double>(by_network) / n};
}

Rates evaluate(const ModularClassifier& clf, const Dataset& test) {
  check_test(test, clf.refset.dim());
  std::vector<Decision> decisions;
  decisions.reserve(test.size());
  for (const auto& p : test.points()) decisions.push_back(classify(clf, p.features));
  return score(decisions, test.labels());
}

namespace {

CurvePoint to_point(double param, const Rates& r) { return {param, r.recognition, r.error, r.rejection, r.network_share}; }

void check_thetas(std::span<const double> thetas) {
  if (thetas.empty()) throw ConfigError("threshold grid is empty");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] >= 0.0 && thetas[i] <= 1.0)) throw ConfigError("thresholds must lie in [0, 1]");
    if (i > 0 && thetas[i] < thetas[i - 1]) throw ConfigError("thresholds must be ascending");
  }
}

}  // namespace

std::vector<CurvePoint> sweep_network_curve(const ModularClassifier& clf, const Dataset& test,
                                            std::span<const double> thetas) {
  check_thetas(thetas);
  check_test(test, clf.refset.dim());
  const auto labels = network_labels(clf);
  // Network outputs and the k-NN fallback do not depend on theta.
  std::vector<std::vector<double>> outputs;
  std::vector<Decision> fallback;
  outputs.reserve(test.size());
  fallback.reserve(test.size());
  for (const auto& p : test.points()) {
    outputs.push_back(network_outputs(clf, p.features));
    fallback.push_back(knn_decide(clf.refset, p.features, clf.k, KnnMode::unanimity));
  }
  const auto truth = test.labels();
  std::vector<CurvePoint> curve;
  std::vector<Decision> decisions(test.size());
  for (double theta : thetas) {
    for (std::size_t i = 0; i < test.size(); ++i) {
      decisions[i] = cooperate(outputs[i], labels, theta, clf.max_output_tiebreak, [&] { return fallback[i]; });
    }
    curve.push_back(to_point(theta, score(decisions, truth)));
  }
  return curve;
}

std::vector<CurvePoint> sweep_knn_curve(const ReferenceSet& refs, const Dataset& test, std::span<const std::size_t> ks) {
  if (ks.empty()) throw ConfigError("k grid is empty");
  check_test(test, refs.dim());
  const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) < 1 || kmax > refs.size()) {
    throw ConfigError("every k must lie in [1, reference set size]");
  }
  std::vector<std::vector<Neighbor>> neighbors;
  neighbors.reserve(test.size());
  for (const auto& p : test.points()) neighbors.push_back(nearest(refs, p.features, kmax));
  const auto truth = test.labels();
  std::vector<CurvePoint> curve;
  std::vector<Decision> decisions(test.size());
  for (auto k : ks) {
    for (std::size_t i = 0; i < test.size(); ++i) {
      decisions[i] = decide_from_neighbors(std::span<const Neighbor>(neighbors[i]).first(k), KnnMode::unanimity);
    }
    curve.push_back(to_point(static_cast<double>(k), score(decisions, truth)));
  }
  return curve;
}

std::vector<CurvePoint> sweep_single_mlp_curve(const Network& net, const Dataset& test, std::span<const double> thetas) {
  if (thetas.empty()) throw ConfigError("threshold grid is empty");
  for (double t : thetas) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("thresholds must be finite and >= 0");
  }
  if (net.layers.empty()) throw ConfigError("network has no layers");
  check_test(test, net.layout.inputs);
  std::vector<std::pair<int, double>> best;
  best.reserve(test.size());
  for (const auto& p : test.points()) {
    const auto out = forward(net, p.features);
    const auto it = std::max_element(out.begin(), out.end());
    best.emplace_back(static_cast<int>(it - out.begin()), *it);
  }
  const auto truth = test.labels();
  std::vector<CurvePoint> curve;
  std::vector<Decision> decisions(test.size());
  for (double theta : thetas) {
    for (std::size_t i = 0; i < test.size(); ++i) {
      decisions[i] = best[i].second >= theta ? Decision{true, best[i].first, DecisionSource::network, 0}
                                             : Decision::reject(DecisionSource::network);
    }
    auto point = to_point(theta, score(decisions, truth));
    point.network_share = 0.0;
    curve.push_back(point);
  }
  return curve;
}

std::vector<double> default_theta_grid() {
  std::vector<double> grid;
  grid.reserve(50);
  for (int i = 0; i < 50; ++i) grid.push_back(1.0 - 0.5 * std::pow(0.001 / 0.5, i / 49.0));
  return grid;
}

TrainResult train_baseline_mlp(const Dataset& train, const BaselineConfig& config) {
  if (train.empty()) throw DataError("training set is empty");
  Layout layout{train.dim(), config.hidden, train.class_names().size()};
  layout.validate();
  std::vector<std::vector<double>> inputs;
  inputs.reserve(train.size());
  for (const auto& p : train.points()) inputs.push_back(p.features);
  const auto labels = train.labels();
  return train_classifier(init_network(layout, derive_seed(config.train.seed, 0)), inputs, labels, config.train);
}

const CurvePoint& lowest_error_point(std::span<const CurvePoint> curve) {
  if (curve.empty()) throw ConfigError("curve is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].error < curve[best].error ||
        (curve[i].error == curve[best].error && curve[i].recognition > curve[best].recognition)) {
      best = i;
    }
  }
  return curve[best];
}

}  // namespace isletnet
