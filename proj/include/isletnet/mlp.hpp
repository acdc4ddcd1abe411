#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace isletnet {

struct Layout {
  std::size_t inputs = 0;
  std::vector<std::size_t> hidden;
  std::size_t outputs = 1;

  void validate() const;
  // Unit counts per layer including the input layer.
  std::vector<std::size_t> widths() const;
};

// Fully connected sigmoid layer. weights is row-major, outputs x inputs.
struct Layer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;
};

struct Network {
  Layout layout;
  std::vector<Layer> layers;

  // Throws DataError if any shape disagrees with the layout or a parameter is
  // not finite.
  void validate() const;
  std::size_t parameter_count() const;
};

struct TrainParams {
  double learning_rate = 0.1;
  double momentum = 0.9;
  std::size_t max_epochs = 500;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Weights uniform in +-1/sqrt(fan_in), biases zero.
Network init_network(const Layout& layout, std::uint64_t seed);

// Logistic function, kept strictly inside (0, 1).
double sigmoid(double z);

std::vector<double> forward(const Network& net, std::span<const double> x);

// Half squared error of one example.
double example_loss(const Network& net, std::span<const double> x, std::span<const double> target);

// Gradient of example_loss with the same shapes as Network::layers.
std::vector<Layer> loss_gradient(const Network& net, std::span<const double> x, std::span<const double> target);

struct TrainResult {
  Network network;
  bool converged = false;
  std::size_t epochs = 0;  // epochs of weight updates performed
  std::size_t training_errors = 0;
};

using Examples = std::span<const std::vector<double>>;

// Two-class training of a single-output network: positives target 1,
// negatives 0. Success means every positive scores >= threshold and every
// negative below it; it is checked before each epoch and after the last.
TrainResult train(Network net, Examples positives, Examples negatives, const TrainParams& params);

// Training errors of a single-output network at the threshold.
std::size_t count_errors(const Network& net, Examples positives, Examples negatives, double threshold);

// One-of-n training of a multi-output network. Stops early once every
// example's largest output is its own class.
TrainResult train_classifier(Network net, Examples inputs, std::span<const int> labels, const TrainParams& params);

using Ladder = std::vector<std::vector<std::size_t>>;

// Hidden layouts tried in order by escalate_architecture.
Ladder default_ladder();

struct EscalationResult {
  Network network;
  bool converged = false;
  std::size_t rung = 0;
  std::size_t epochs = 0;
  std::size_t training_errors = 0;
};

// Trains each rung from a fresh initialisation and keeps the first that
// separates the training set; otherwise the rung with the fewest errors
// (earliest on ties).
EscalationResult escalate_architecture(Examples positives, Examples negatives, const Ladder& ladder,
                                       const TrainParams& params);

// Deterministic per-task seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace isletnet
