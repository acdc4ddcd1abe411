#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "isletnet/ensemble.hpp"

namespace isletnet {

// Every tunable of a run. Files use one `key = value` per line; '#' starts a
// comment. Lists are comma separated and a ladder rung with several hidden
// layers joins them with '-', e.g. `ladder = 2,5,10,50-20`.
struct RunConfig {
  std::uint64_t seed = 0;

  LinkageKind linkage = LinkageKind::flexible;
  double linkage_beta = 0.0;  // flexible linkage only

  double alpha = 1.0;
  std::size_t bins = 40;
  std::size_t min_nodes = 2;
  bool alpha_search = false;
  double alpha_hi = 10.0;
  std::size_t alpha_iterations = 8;

  std::size_t islet_min_size = 15;

  double learning_rate = 0.1;
  double momentum = 0.9;
  std::size_t max_epochs = 500;
  double success_threshold = 0.5;
  Ladder ladder = default_ladder();
  double negative_ratio = 0.0;

  RefsetChoice refset = RefsetChoice::full;
  std::size_t knn_k = 3;
  double theta = 0.5;
  bool max_output_tiebreak = false;
  std::vector<double> theta_grid = default_theta_grid();
  std::vector<std::size_t> knn_ks{10, 9, 8, 7, 6, 5, 4, 3, 2, 1};

  std::vector<std::size_t> mlp_hidden{50};
  std::size_t mlp_epochs = 200;

  std::size_t folds = 5;

  // Paths are not part of the canonical form.
  std::string data_csv;
  std::string data_images;
  std::string data_labels;
  std::string output_dir;

  // Applies one `key = value` setting; throws ConfigError for unknown keys or
  // malformed values.
  void set(std::string_view key, std::string_view value);
  void validate() const;

  // Sorted `key=value` lines of every non-path setting.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  Linkage linkage_params() const;
  PipelineConfig pipeline() const;
  BaselineConfig baseline() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace isletnet
