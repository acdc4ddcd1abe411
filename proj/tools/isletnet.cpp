// Command-line driver for every pipeline stage.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "isletnet/config.hpp"
#include "isletnet/dataset.hpp"
#include "isletnet/errors.hpp"
#include "isletnet/islet.hpp"
#include "isletnet/multicut.hpp"
#include "isletnet/protocol.hpp"
#include "isletnet/serialize.hpp"

namespace fs = std::filesystem;
using namespace isletnet;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInvariant = 4;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string data_csv;
  std::string images;
  std::string labels;
  bool skip_header = false;

  RunConfig config() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (!data_csv.empty()) cfg.data_csv = data_csv;
    if (!images.empty()) cfg.data_images = images;
    if (!labels.empty()) cfg.data_labels = labels;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "Config file (key = value lines)");
  cmd->add_option("--set", c.overrides, "Override a config key, e.g. --set alpha=2");
  cmd->add_option("--seed", c.seed, "Random seed");
}

void add_data(CLI::App* cmd, Common& c) {
  cmd->add_option("--data", c.data_csv, "Labelled CSV dataset (label in the last column)");
  cmd->add_option("--images", c.images, "IDX image file (used with --labels)");
  cmd->add_option("--labels", c.labels, "IDX label file (used with --images)");
  cmd->add_flag("--skip-header", c.skip_header, "Skip the first CSV row");
}

Dataset load_data(const RunConfig& cfg, bool skip_header) {
  if (!cfg.data_csv.empty()) return load_csv(cfg.data_csv, {skip_header});
  if (!cfg.data_images.empty() && !cfg.data_labels.empty()) return load_idx_pair(cfg.data_images, cfg.data_labels);
  throw ConfigError("no dataset given (use --data, or --images with --labels)");
}

Json artifact(std::string_view kind, const RunConfig& cfg) { return make_artifact({std::string(kind), cfg.hash(), cfg.seed}); }

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-level clustering, islet extraction and modular classification"};
  app.require_subcommand(1);

  Common common;

  std::string preset = "fig2";
  std::string out_path;
  auto* synth = app.add_subcommand("synth", "Write a synthetic density-variation dataset as CSV");
  add_common(synth, common);
  synth->add_option("--preset", preset, "Cluster layout")->check(CLI::IsMember({"fig2"}));
  synth->add_option("-o,--out", out_path, "Output CSV")->required();

  auto* cluster = app.add_subcommand("cluster", "Build the dendrogram of a dataset");
  add_common(cluster, common);
  add_data(cluster, common);
  cluster->add_option("-o,--out", out_path, "Output dendrogram JSON")->required();

  std::string dendrogram_path;
  std::optional<double> alpha;
  bool search = false;
  auto* cut = app.add_subcommand("cut", "Multi-level cut of a dendrogram");
  add_common(cut, common);
  add_data(cut, common);
  cut->add_option("--dendrogram", dendrogram_path, "Dendrogram JSON from `cluster`")->required();
  cut->add_option("--alpha", alpha, "Tolerance multiplier");
  cut->add_flag("--search", search, "Choose alpha by dichotomic search on islet coverage (needs labelled data)");
  cut->add_option("-o,--out", out_path, "Output clustering JSON")->required();

  std::string clustering_path;
  auto* islets = app.add_subcommand("islets", "Extract islets from a clustering");
  add_common(islets, common);
  add_data(islets, common);
  islets->add_option("--dendrogram", dendrogram_path, "Dendrogram JSON from `cluster`")->required();
  islets->add_option("--clustering", clustering_path, "Clustering JSON from `cut`")->required();
  islets->add_option("-o,--out", out_path, "Output partition JSON")->required();

  auto* train = app.add_subcommand("train", "Train the modular classifier and the single-MLP baseline");
  add_common(train, common);
  add_data(train, common);
  train->add_option("-o,--out", out_path, "Output model bundle JSON")->required();

  std::string model_path;
  std::string queries_path;
  auto* classify_cmd = app.add_subcommand("classify", "Label a CSV of query rows");
  add_common(classify_cmd, common);
  classify_cmd->add_option("--model", model_path, "Model bundle from `train`")->required();
  classify_cmd->add_option("--queries", queries_path, "CSV of feature rows (a trailing label column is ignored)")
      ->required();
  classify_cmd->add_flag("--skip-header", common.skip_header, "Skip the first CSV row");
  classify_cmd->add_option("-o,--out", out_path, "Output CSV")->required();

  std::string out_dir;
  auto* curve = app.add_subcommand("curve", "Recognition/error/rejection curves on a test set");
  add_common(curve, common);
  add_data(curve, common);
  curve->add_option("--model", model_path, "Model bundle from `train`")->required();
  curve->add_option("-o,--out-dir", out_dir, "Directory for the curve CSVs")->required();

  std::optional<std::size_t> folds;
  auto* crossval = app.add_subcommand("crossval", "K-fold train/test protocol with averaged curves");
  add_common(crossval, common);
  add_data(crossval, common);
  crossval->add_option("--folds", folds, "Number of folds");
  crossval->add_option("-o,--out-dir", out_dir, "Directory for fold and averaged curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (synth->parsed()) {
      const auto cfg = common.config();
      const auto specs = fig2_preset();
      const auto data = synth_density_variation(specs, cfg.seed);
      ensure_parent(out_path);
      write_atomic(out_path, "# seed=" + std::to_string(cfg.seed) + " config=" + cfg.hash() + "\n" + to_csv(data));
      std::cout << "wrote " << data.size() << " points in " << data.class_names().size() << " clusters to " << out_path
                << "\n";
    } else if (cluster->parsed()) {
      const auto cfg = common.config();
      const auto data = load_data(cfg, common.skip_header);
      const auto tree = build_dendrogram(pairwise_distances(data), cfg.linkage_params());
      auto doc = artifact("dendrogram", cfg);
      doc["linkage"] = to_string(cfg.linkage);
      doc["dendrogram"] = to_json(tree);
      ensure_parent(out_path);
      write_json(out_path, doc);
      std::cout << "wrote dendrogram of " << tree.leaf_count() << " leaves to " << out_path << "\n";
    } else if (cut->parsed()) {
      auto cfg = common.config();
      if (alpha) cfg.alpha = *alpha;
      cfg.validate();
      const auto tree = dendrogram_from_json(read_json(dendrogram_path).at("dendrogram"));
      auto cut_cfg = cfg.pipeline().cut;
      if (search || cfg.alpha_search) {
        const auto data = load_data(cfg, common.skip_header);
        if (data.size() != tree.leaf_count()) throw DataError("dataset size does not match the dendrogram");
        const auto labels = data.labels();
        cut_cfg.alpha = search_alpha(tree, labels, islet_coverage_quality(tree, {cfg.islet_min_size}), cut_cfg,
                                     {cfg.alpha_hi, cfg.alpha_iterations});
      }
      const auto clustering = multilevel_cut(tree, cut_cfg);
      auto doc = artifact("clustering", cfg);
      doc["alpha"] = cut_cfg.alpha;
      doc["bins"] = cut_cfg.bins;
      doc["clustering"] = to_json(clustering);
      ensure_parent(out_path);
      write_json(out_path, doc);
      std::cout << clustering.clusters.size() << " clusters (alpha " << format_real(cut_cfg.alpha) << ") written to "
                << out_path << "\n";
    } else if (islets->parsed()) {
      const auto cfg = common.config();
      const auto data = load_data(cfg, common.skip_header);
      const auto tree = dendrogram_from_json(read_json(dendrogram_path).at("dendrogram"));
      const auto clustering = clustering_from_json(read_json(clustering_path).at("clustering"));
      const auto labels = data.labels();
      const IsletConfig icfg{cfg.islet_min_size};
      const auto partition = detect_islets(tree, clustering, labels, icfg);
      check_islet_partition(partition, labels, icfg);
      auto doc = artifact("islets", cfg);
      doc["min_size"] = cfg.islet_min_size;
      doc["partition"] = to_json(partition);
      ensure_parent(out_path);
      write_json(out_path, doc);
      std::cout << partition.islets.size() << " islets, coverage " << islet_coverage(partition) << "\n";
    } else if (train->parsed()) {
      const auto cfg = common.config();
      const auto data = load_data(cfg, common.skip_header);
      BuildResult details;
      const auto bundle = train_models(data, cfg, &details);
      auto doc = artifact("model", cfg);
      doc["alpha"] = details.alpha;
      doc["islets"] = details.partition.islets.size();
      doc["coverage"] = islet_coverage(details.partition);
      doc["knn_only"] = details.knn_only;
      doc["refset_fallback"] = details.refset_fallback;
      doc["model"] = to_json(bundle);
      ensure_parent(out_path);
      write_json(out_path, doc);
      std::size_t converged = 0;
      for (const auto& n : bundle.classifier.networks) converged += n.converged ? 1 : 0;
      std::cout << details.partition.islets.size() << " islets, " << converged << " networks converged, coverage "
                << islet_coverage(details.partition) << "\n";
      if (details.knn_only) std::cout << "no islet found: the classifier is a plain k-NN\n";
    } else if (classify_cmd->parsed()) {
      const auto cfg = common.config();
      const auto doc = read_json(model_path);
      read_meta(doc, "model");
      const auto bundle = bundle_from_json(doc.at("model"));
      const auto& clf = bundle.classifier;
      const auto rows = load_feature_rows(queries_path, clf.refset.dim(), {common.skip_header});
      std::string out = "# seed=" + std::to_string(cfg.seed) + " config=" + cfg.hash() + "\nlabel,source\n";
      for (const auto& x : rows) {
        const auto d = classify(clf, x);
        if (!d.accepted) {
          out += "reject,";
        } else {
          out += clf.class_names[static_cast<std::size_t>(d.label)] + ",";
        }
        out += d.source == DecisionSource::network ? "network-" + std::to_string(d.network) + "\n" : "knn\n";
      }
      ensure_parent(out_path);
      write_atomic(out_path, out);
      std::cout << "classified " << rows.size() << " rows\n";
    } else if (curve->parsed()) {
      const auto cfg = common.config();
      const auto doc = read_json(model_path);
      read_meta(doc, "model");
      const auto bundle = bundle_from_json(doc.at("model"));
      const auto test = align_labels(load_data(cfg, common.skip_header), bundle.classifier.class_names);
      const auto curves = compute_curves(bundle, test, cfg);
      write_curves(out_dir, "", curves, cfg);
      const auto& d = lowest_error_point(curves.distributed);
      const auto& k = lowest_error_point(curves.knn);
      std::cout << "lowest error: distributed " << d.recognition << "% recognition at " << d.error
                << "% error, k-NN " << k.recognition << "% at " << k.error << "%\n";
    } else if (crossval->parsed()) {
      auto cfg = common.config();
      if (folds) cfg.folds = *folds;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (cfg.output_dir.empty()) throw ConfigError("no output directory (use --out-dir)");
      cfg.validate();
      const auto data = load_data(cfg, common.skip_header);
      const auto report = run_crossval(data, cfg, [](std::string_view msg) { std::cerr << msg << "\n"; });
      write_crossval(cfg.output_dir, report, cfg);
      const auto& d = lowest_error_point(report.average.distributed);
      const auto& k = lowest_error_point(report.average.knn);
      std::cout << "average lowest error: distributed " << d.recognition << "% recognition at " << d.error
                << "% error, k-NN " << k.recognition << "% at " << k.error << "%\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const Json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
