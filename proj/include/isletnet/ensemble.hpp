#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isletnet/dataset.hpp"
#include "isletnet/hierarchy.hpp"
#include "isletnet/islet.hpp"
#include "isletnet/knn.hpp"
#include "isletnet/mlp.hpp"
#include "isletnet/multicut.hpp"

namespace isletnet {

enum class RefsetChoice { full, residual };

std::string to_string(RefsetChoice choice);
RefsetChoice parse_refset_choice(const std::string& name);

struct PipelineConfig {
  Linkage linkage = Linkage::flexible(0.0);
  CutConfig cut;
  // When set, alpha comes from search_alpha with islet-coverage quality
  // instead of cut.alpha.
  std::optional<AlphaSearch> alpha_search;
  IsletConfig islets;
  TrainParams train;
  Ladder ladder = default_ladder();
  // Negatives per islet network are subsampled to this multiple of the
  // positive count; 0 keeps them all.
  double negative_ratio = 0.0;
  RefsetChoice refset = RefsetChoice::full;
  std::size_t k = 3;
  double theta = 0.5;
  // With two or more networks firing, take the highest output instead of
  // deferring to the k-NN.
  bool max_output_tiebreak = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IsletNetwork {
  Network network;
  int label = 0;
  bool converged = false;
  std::size_t rung = 0;
};

struct ModularClassifier {
  std::vector<IsletNetwork> networks;
  ReferenceSet refset;
  RefsetChoice refset_choice = RefsetChoice::full;
  std::size_t k = 3;
  double theta = 0.5;
  bool max_output_tiebreak = false;
  std::vector<std::string> class_names;

  void validate() const;
};

struct BuildResult {
  ModularClassifier classifier;
  Dendrogram tree;
  Clustering clustering;
  IsletPartition partition;
  double alpha = 0.0;
  std::vector<EscalationResult> escalations;
  // No islet was found and the classifier is a plain k-NN.
  bool knn_only = false;
  // The residual set was too small for k and the full training set was used.
  bool refset_fallback = false;
};

BuildResult build(const Dataset& train, const PipelineConfig& config);

// The cooperation rule on precomputed network outputs. `fallback` is called
// only when the networks do not settle the decision.
Decision cooperate(std::span<const double> outputs, std::span<const int> labels, double theta, bool max_output_tiebreak,
                   const std::function<Decision()>& fallback);

std::vector<double> network_outputs(const ModularClassifier& clf, std::span<const double> x);
Decision classify(const ModularClassifier& clf, std::span<const double> x);

struct Rates {
  double recognition = 0.0;
  double error = 0.0;
  double rejection = 0.0;
  // Percentage of all test points decided by an islet network.
  double network_share = 0.0;
};

Rates score(std::span<const Decision> decisions, std::span<const int> truth);
Rates evaluate(const ModularClassifier& clf, const Dataset& test);

struct CurvePoint {
  double param = 0.0;  // theta, or k for the k-NN baseline
  double recognition = 0.0;
  double error = 0.0;
  double rejection = 0.0;
  double network_share = 0.0;
};

std::vector<CurvePoint> sweep_network_curve(const ModularClassifier& clf, const Dataset& test,
                                            std::span<const double> thetas);
std::vector<CurvePoint> sweep_knn_curve(const ReferenceSet& refs, const Dataset& test, std::span<const std::size_t> ks);
// Accepts the argmax class when the largest output reaches theta.
std::vector<CurvePoint> sweep_single_mlp_curve(const Network& net, const Dataset& test, std::span<const double> thetas);

// 50 thresholds from 0.5 towards 0.999, geometrically closer to 1.
std::vector<double> default_theta_grid();

struct BaselineConfig {
  std::vector<std::size_t> hidden{50};
  TrainParams train;
};

// One-of-n MLP over all classes, trained on the full training set.
TrainResult train_baseline_mlp(const Dataset& train, const BaselineConfig& config);

// Lowest error on the curve, highest recognition among equal errors.
const CurvePoint& lowest_error_point(std::span<const CurvePoint> curve);

}  // namespace isletnet
