#include "isletnet/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "isletnet/config.hpp"
#include "isletnet/errors.hpp"

namespace isletnet {

namespace {

// nlohmann throws its own exception types on missing keys or wrong types;
// every reader funnels them into DataError.
template <typename Fn>
auto guarded(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw DataError("malformed " + std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json make_artifact(const ArtifactMeta& meta) {
  return Json{{"kind", meta.kind}, {"config_hash", meta.config_hash}, {"seed", meta.seed}};
}

ArtifactMeta read_meta(const Json& doc, std::string_view expected_kind) {
  return guarded("artifact header", [&] {
    ArtifactMeta meta{doc.at("kind").get<std::string>(), doc.at("config_hash").get<std::string>(),
                      doc.at("seed").get<std::uint64_t>()};
    if (meta.kind != expected_kind) {
      throw DataError("expected a " + std::string(expected_kind) + " artifact, found " + meta.kind);
    }
    return meta;
  });
}

Json to_json(const Dendrogram& tree) {
  Json merges = Json::array();
  for (const auto& m : tree.merges()) merges.push_back(Json::array({m.left, m.right, m.height, m.size}));
  return Json{{"leaves", tree.leaf_count()}, {"merges", std::move(merges)}};
}

Dendrogram dendrogram_from_json(const Json& j) {
  return guarded("dendrogram", [&] {
    std::vector<Merge> merges;
    for (const auto& m : j.at("merges")) {
      if (m.size() != 4) throw DataError("dendrogram merges must have 4 fields");
      merges.push_back({m[0].get<std::size_t>(), m[1].get<std::size_t>(), m[2].get<double>(), m[3].get<std::size_t>()});
    }
    return Dendrogram(j.at("leaves").get<std::size_t>(), std::move(merges));
  });
}

Json to_json(const Clustering& clustering) {
  Json clusters = Json::array();
  for (const auto& c : clustering.clusters) clusters.push_back({{"node", c.node}, {"members", c.members}});
  return Json{{"clusters", std::move(clusters)}};
}

Clustering clustering_from_json(const Json& j) {
  return guarded("clustering", [&] {
    Clustering out;
    for (const auto& c : j.at("clusters")) {
      out.clusters.push_back({c.at("node").get<std::size_t>(), c.at("members").get<std::vector<std::size_t>>()});
    }
    out.assignment(out.point_count());
    return out;
  });
}

Json to_json(const IsletPartition& partition) {
  Json islets = Json::array();
  for (const auto& i : partition.islets) {
    islets.push_back({{"node", i.node}, {"label", i.label}, {"members", i.members}});
  }
  return Json{{"islets", std::move(islets)}, {"residual", partition.residual}, {"coverage", islet_coverage(partition)}};
}

IsletPartition partition_from_json(const Json& j) {
  return guarded("islet partition", [&] {
    IsletPartition out;
    for (const auto& i : j.at("islets")) {
      out.islets.push_back(
          {i.at("members").get<std::vector<std::size_t>>(), i.at("label").get<int>(), i.at("node").get<std::size_t>()});
    }
    out.residual = j.at("residual").get<std::vector<std::size_t>>();
    return out;
  });
}

Json to_json(const Network& net) {
  Json layers = Json::array();
  for (const auto& l : net.layers) layers.push_back({{"weights", l.weights}, {"biases", l.biases}});
  return Json{{"inputs", net.layout.inputs},
              {"hidden", net.layout.hidden},
              {"outputs", net.layout.outputs},
              {"layers", std::move(layers)}};
}

Network network_from_json(const Json& j) {
  return guarded("network", [&] {
    Network net;
    net.layout = {j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::vector<std::size_t>>(),
                  j.at("outputs").get<std::size_t>()};
    net.layout.validate();
    const auto widths = net.layout.widths();
    const auto& layers = j.at("layers");
    if (layers.size() + 1 != widths.size()) throw DataError("network has the wrong number of layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      net.layers.push_back({widths[l], widths[l + 1], layers[l].at("weights").get<std::vector<double>>(),
                            layers[l].at("biases").get<std::vector<double>>()});
    }
    net.validate();
    return net;
  });
}

Json to_json(const ModelBundle& bundle) {
  const auto& clf = bundle.classifier;
  Json networks = Json::array();
  for (const auto& n : clf.networks) {
    networks.push_back({{"label", n.label}, {"converged", n.converged}, {"rung", n.rung}, {"network", to_json(n.network)}});
  }
  Json training = Json::array();
  for (const auto& p : bundle.training.points()) training.push_back({{"label", p.label}, {"features", p.features}});
  std::vector<std::size_t> ids;
  for (const auto& p : clf.refset.points()) ids.push_back(p.id);
  Json out{{"class_names", clf.class_names},
           {"theta", clf.theta},
           {"max_output_tiebreak", clf.max_output_tiebreak},
           {"networks", std::move(networks)},
           {"knn", {{"k", clf.k}, {"refset", to_string(clf.refset_choice)}, {"ids", ids}}},
           {"training", std::move(training)},
           {"training_digest", bundle.training_digest}};
  out["baseline"] = bundle.baseline ? to_json(*bundle.baseline) : Json(nullptr);
  return out;
}

ModelBundle bundle_from_json(const Json& j) {
  return guarded("model bundle", [&] {
    ModelBundle b;
    auto& clf = b.classifier;
    clf.class_names = j.at("class_names").get<std::vector<std::string>>();
    clf.theta = j.at("theta").get<double>();
    clf.max_output_tiebreak = j.at("max_output_tiebreak").get<bool>();
    for (const auto& n : j.at("networks")) {
      clf.networks.push_back({network_from_json(n.at("network")), n.at("label").get<int>(), n.at("converged").get<bool>(),
                              n.at("rung").get<std::size_t>()});
    }
    const auto& knn = j.at("knn");
    clf.k = knn.at("k").get<std::size_t>();
    clf.refset_choice = parse_refset_choice(knn.at("refset").get<std::string>());
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    for (const auto& p : j.at("training")) {
      features.push_back(p.at("features").get<std::vector<double>>());
      labels.push_back(p.at("label").get<int>());
    }
    b.training = Dataset(std::move(features), std::move(labels), clf.class_names);
    const auto ids = knn.at("ids").get<std::vector<std::size_t>>();
    clf.refset = ReferenceSet::from(b.training, ids);
    clf.validate();
    if (!j.at("baseline").is_null()) b.baseline = network_from_json(j.at("baseline"));
    b.training_digest = j.at("training_digest").get<std::string>();
    if (b.training_digest != training_digest(b.training)) throw DataError("model training set does not match its digest");
    return b;
  });
}

std::string training_digest(const Dataset& train) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_csv(train))));
  return buf;
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_json(const std::filesystem::path& path, const Json& doc) { write_atomic(path, doc.dump(1) + "\n"); }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace isletnet
