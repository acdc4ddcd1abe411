#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "isletnet/ensemble.hpp"
#include "isletnet/hierarchy.hpp"
#include "isletnet/islet.hpp"
#include "isletnet/mlp.hpp"
#include "isletnet/multicut.hpp"

namespace isletnet {

using Json = nlohmann::json;

// Fields shared by every JSON artifact.
struct ArtifactMeta {
  std::string kind;
  std::string config_hash;
  std::uint64_t seed = 0;
};

Json make_artifact(const ArtifactMeta& meta);
ArtifactMeta read_meta(const Json& doc, std::string_view expected_kind);

Json to_json(const Dendrogram& tree);
Dendrogram dendrogram_from_json(const Json& j);

Json to_json(const Clustering& clustering);
Clustering clustering_from_json(const Json& j);

Json to_json(const IsletPartition& partition);
IsletPartition partition_from_json(const Json& j);

Json to_json(const Network& net);
Network network_from_json(const Json& j);

// Everything the classify and curve stages need. The training set is kept
// so the k-NN baseline and the reference set can be rebuilt; the reference
// set is stored as training ids.
struct ModelBundle {
  ModularClassifier classifier;
  std::optional<Network> baseline;
  Dataset training;
  // FNV-1a 64 of the training set's CSV form.
  std::string training_digest;
};

Json to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const Json& j);

std::string training_digest(const Dataset& train);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view contents);
void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

}  // namespace isletnet
