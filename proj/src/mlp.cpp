#include "isletnet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "isletnet/errors.hpp"

namespace isletnet {

void Layout::validate() const {
  if (inputs < 1 || outputs < 1) throw ConfigError("network layers must have at least one unit");
  for (auto h : hidden) {
    if (h < 1) throw ConfigError("hidden layers must have at least one unit");
  }
}

std::vector<std::size_t> Layout::widths() const {
  std::vector<std::size_t> w{inputs};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(outputs);
  return w;
}

void Network::validate() const {
  layout.validate();
  const auto w = layout.widths();
  if (layers.size() + 1 != w.size()) throw DataError("network has the wrong number of layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.inputs != w[l] || layer.outputs != w[l + 1] || layer.weights.size() != layer.inputs * layer.outputs ||
        layer.biases.size() != layer.outputs) {
      throw DataError("layer " + std::to_string(l) + " does not match the layout");
    }
    for (double v : layer.weights) {
      if (!std::isfinite(v)) throw DataError("network weights must be finite");
    }
    for (double v : layer.biases) {
      if (!std::isfinite(v)) throw DataError("network biases must be finite");
    }
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

void TrainParams::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("success threshold must be in (0, 1)");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Network init_network(const Layout& layout, std::uint64_t seed) {
  layout.validate();
  std::mt19937_64 rng(seed);
  Network net;
  net.layout = layout;
  const auto w = layout.widths();
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    Layer layer;
    layer.inputs = w[l];
    layer.outputs = w[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    std::uniform_real_distribution<double> dist(-bound, bound);
    layer.weights.resize(layer.inputs * layer.outputs);
    for (auto& v : layer.weights) v = dist(rng);
    layer.biases.assign(layer.outputs, 0.0);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

double sigmoid(double z) {
  static const double hi = std::nextafter(1.0, 0.0);
  static const double lo = std::numeric_limits<double>::min();
  return std::clamp(1.0 / (1.0 + std::exp(-z)), lo, hi);
}

namespace {

void check_input(const Network& net, std::span<const double> x) {
  if (net.layers.empty()) throw ConfigError("network has no layers");
  if (x.size() != net.layers.front().inputs) {
    throw DataError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                    std::to_string(net.layers.front().inputs));
  }
}

// Per-layer buffers reused across examples.
struct Workspace {
  std::vector<std::vector<double>> acts;  // input first
  std::vector<double> delta;
  std::vector<double> prev;
};

void run_forward(const Network& net, std::span<const double> x, Workspace& ws) {
  check_input(net, x);
  ws.acts.resize(net.layers.size() + 1);
  ws.acts[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto& in = ws.acts[l];
    auto& out = ws.acts[l + 1];
    out.resize(layer.outputs);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* row = layer.weights.data() + o * layer.inputs;
      double z = layer.biases[o];
      for (std::size_t i = 0; i < layer.inputs; ++i) z += row[i] * in[i];
      out[o] = sigmoid(z);
    }
  }
}

std::vector<Layer> zero_like(const Network& net) {
  std::vector<Layer> g;
  g.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.push_back({l.inputs, l.outputs, std::vector<double>(l.weights.size(), 0.0), std::vector<double>(l.outputs, 0.0)});
  }
  return g;
}

// Writes the gradient into `grad`, which must already have the right shapes.
void backprop(const Network& net, std::span<const double> x, std::span<const double> target, std::vector<Layer>& grad,
              Workspace& ws) {
  run_forward(net, x, ws);
  if (target.size() != net.layers.back().outputs) throw DataError("target has the wrong dimension");
  const auto& out = ws.acts.back();
  auto& delta = ws.delta;
  delta.resize(out.size());
  for (std::size_t o = 0; o < out.size(); ++o) delta[o] = (out[o] - target[o]) * out[o] * (1.0 - out[o]);
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const auto& layer = net.layers[l];
    const auto& in = ws.acts[l];
    auto& g = grad[l];
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      double* row = g.weights.data() + o * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) row[i] = delta[o] * in[i];
      g.biases[o] = delta[o];
    }
    if (l == 0) break;
    auto& prev = ws.prev;
    prev.assign(layer.inputs, 0.0);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      const double* row = layer.weights.data() + o * layer.inputs;
      for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] += row[i] * delta[o];
    }
    for (std::size_t i = 0; i < layer.inputs; ++i) prev[i] *= in[i] * (1.0 - in[i]);
    std::swap(delta, prev);
  }
}

struct Sgd {
  std::vector<Layer> velocity;
  std::vector<Layer> grad;
  Workspace ws;

  explicit Sgd(const Network& net) : velocity(zero_like(net)), grad(zero_like(net)) {}

  void step(Network& net, std::span<const double> x, std::span<const double> target, const TrainParams& p) {
    backprop(net, x, target, grad, ws);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      auto& layer = net.layers[l];
      auto& v = velocity[l];
      const auto& g = grad[l];
      for (std::size_t k = 0; k < layer.weights.size(); ++k) {
        v.weights[k] = p.momentum * v.weights[k] - p.learning_rate * g.weights[k];
        layer.weights[k] += v.weights[k];
      }
      for (std::size_t k = 0; k < layer.biases.size(); ++k) {
        v.biases[k] = p.momentum * v.biases[k] - p.learning_rate * g.biases[k];
        layer.biases[k] += v.biases[k];
      }
    }
  }
};

void check_finite(const Network& net) {
  for (const auto& l : net.layers) {
    for (double v : l.weights) {
      if (!std::isfinite(v)) throw InvariantError("training produced a non-finite weight");
    }
  }
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> x) {
  Workspace ws;
  run_forward(net, x, ws);
  return std::move(ws.acts.back());
}

double example_loss(const Network& net, std::span<const double> x, std::span<const double> target) {
  const auto out = forward(net, x);
  if (target.size() != out.size()) throw DataError("target has the wrong dimension");
  double loss = 0.0;
  for (std::size_t o = 0; o < out.size(); ++o) loss += 0.5 * (out[o] - target[o]) * (out[o] - target[o]);
  return loss;
}

std::vector<Layer> loss_gradient(const Network& net, std::span<const double> x, std::span<const double> target) {
  auto grad = zero_like(net);
  Workspace ws;
  backprop(net, x, target, grad, ws);
  return grad;
}

std::size_t count_errors(const Network& net, Examples positives, Examples negatives, double threshold) {
  Workspace ws;
  std::size_t errors = 0;
  for (const auto& x : positives) {
    run_forward(net, x, ws);
    errors += ws.acts.back()[0] >= threshold ? 0 : 1;
  }
  for (const auto& x : negatives) {
    run_forward(net, x, ws);
    errors += ws.acts.back()[0] < threshold ? 0 : 1;
  }
  return errors;
}

TrainResult train(Network net, Examples positives, Examples negatives, const TrainParams& params) {
  params.validate();
  if (positives.empty() || negatives.empty()) throw ConfigError("training needs positive and negative examples");
  if (net.layers.empty() || net.layers.back().outputs != 1) throw ConfigError("two-class training needs one output");

  const std::size_t total = positives.size() + negatives.size();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  Sgd sgd(net);
  const double one = 1.0;
  const double zero = 0.0;

  TrainResult result;
  for (std::size_t epoch = 0;; ++epoch) {
    const std::size_t errors = count_errors(net, positives, negatives, params.threshold);
    if (errors == 0 || epoch == params.max_epochs) {
      result.converged = errors == 0;
      result.epochs = epoch;
      result.training_errors = errors;
      break;
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (auto idx : order) {
      if (idx < positives.size()) {
        sgd.step(net, positives[idx], std::span<const double>(&one, 1), params);
      } else {
        sgd.step(net, negatives[idx - positives.size()], std::span<const double>(&zero, 1), params);
      }
    }
    check_finite(net);
  }
  result.network = std::move(net);
  return result;
}

TrainResult train_classifier(Network net, Examples inputs, std::span<const int> labels, const TrainParams& params) {
  params.validate();
  if (inputs.empty()) throw ConfigError("training needs at least one example");
  if (inputs.size() != labels.size()) throw DataError("inputs and labels differ in length");
  const std::size_t classes = net.layers.back().outputs;
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) throw DataError("label outside the network's outputs");
  }

  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  Sgd sgd(net);
  std::vector<double> target(classes, 0.0);

  Workspace ws;
  auto errors_now = [&] {
    std::size_t errors = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      run_forward(net, inputs[i], ws);
      errors += argmax(ws.acts.back()) == static_cast<std::size_t>(labels[i]) ? 0 : 1;
    }
    return errors;
  };

  TrainResult result;
  for (std::size_t epoch = 0;; ++epoch) {
    const std::size_t errors = errors_now();
    if (errors == 0 || epoch == params.max_epochs) {
      result.converged = errors == 0;
      result.epochs = epoch;
      result.training_errors = errors;
      break;
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (auto idx : order) {
      std::fill(target.begin(), target.end(), 0.0);
      target[static_cast<std::size_t>(labels[idx])] = 1.0;
      sgd.step(net, inputs[idx], target, params);
    }
    check_finite(net);
  }
  result.network = std::move(net);
  return result;
}

Ladder default_ladder() {
  return {{2}, {5}, {10}, {15}, {20}, {25}, {30}, {35}, {40}, {45}, {50}, {100}, {50, 20}};
}

EscalationResult escalate_architecture(Examples positives, Examples negatives, const Ladder& ladder,
                                       const TrainParams& params) {
  params.validate();
  if (positives.empty() || negatives.empty()) throw ConfigError("training needs positive and negative examples");
  if (ladder.empty()) throw ConfigError("architecture ladder is empty");
  const std::size_t dim = positives.front().size();

  EscalationResult best;
  bool have_best = false;
  for (std::size_t rung = 0; rung < ladder.size(); ++rung) {
    Layout layout{dim, ladder[rung], 1};
    TrainParams p = params;
    p.seed = derive_seed(params.seed, rung);
    auto r = train(init_network(layout, derive_seed(p.seed, 0)), positives, negatives, p);
    if (!have_best || r.training_errors < best.training_errors) {
      best = {std::move(r.network), r.converged, rung, r.epochs, r.training_errors};
      have_best = true;
    }
    if (best.converged) break;
  }
  return best;
}

}  // namespace isletnet
