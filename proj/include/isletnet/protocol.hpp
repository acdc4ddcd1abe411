#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isletnet/config.hpp"
#include "isletnet/ensemble.hpp"
#include "isletnet/serialize.hpp"

namespace isletnet {

inline constexpr std::string_view kCurveHeader = "theta_or_k,recognition,error,rejection";

// A `# seed=<seed> config=<hash>` line, the header, then one row per point.
std::string curve_csv(std::span<const CurvePoint> curve, std::uint64_t seed, std::string_view config_hash);
std::vector<CurvePoint> parse_curve_csv(std::string_view text);
std::vector<CurvePoint> load_curve_csv(const std::filesystem::path& path);

// Throws InvariantError unless every rate is in [0, 100] and the three sum to
// 100 within 1e-9.
void check_curve(std::span<const CurvePoint> curve);

struct Curves {
  std::vector<CurvePoint> distributed;
  std::vector<CurvePoint> knn;
  std::vector<CurvePoint> mlp;  // empty without a baseline network
};

// Builds the modular classifier and the single-MLP baseline on `train`.
ModelBundle train_models(const Dataset& train, const RunConfig& config, BuildResult* details = nullptr);

Curves compute_curves(const ModelBundle& bundle, const Dataset& test, const RunConfig& config);

struct FoldReport {
  Curves curves;
  std::size_t islets = 0;
  std::size_t converged_networks = 0;
  double coverage = 0.0;
  double alpha = 0.0;
};

struct CrossvalReport {
  std::vector<FoldReport> folds;
  Curves average;
};

using Progress = std::function<void(std::string_view)>;

CrossvalReport run_crossval(const Dataset& data, const RunConfig& config, const Progress& progress = {});

// Pointwise mean of curves that share the same parameter grid.
std::vector<CurvePoint> average_curves(const std::vector<std::vector<CurvePoint>>& curves);

// fold-<i>-{distributed,knn,mlp}.csv, average-*.csv and summary.json.
void write_crossval(const std::filesystem::path& dir, const CrossvalReport& report, const RunConfig& config);
void write_curves(const std::filesystem::path& dir, std::string_view prefix, const Curves& curves,
                  const RunConfig& config);

}  // namespace isletnet
