#include "isletnet/protocol.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "isletnet/errors.hpp"

namespace isletnet {

std::string curve_csv(std::span<const CurvePoint> curve, std::uint64_t seed, std::string_view config_hash) {
  std::string out = "# seed=" + std::to_string(seed) + " config=" + std::string(config_hash) + "\n";
  out += kCurveHeader;
  out += '\n';
  for (const auto& p : curve) {
    out += format_real(p.param) + ',' + format_real(p.recognition) + ',' + format_real(p.error) + ',' +
           format_real(p.rejection) + '\n';
  }
  return out;
}

std::vector<CurvePoint> parse_curve_csv(std::string_view text) {
  std::vector<CurvePoint> out;
  bool header = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kCurveHeader) throw DataError("curve file has an unexpected header");
      header = true;
      continue;
    }
    double v[4];
    std::size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
      const auto comma = f < 3 ? line.find(',', pos) : line.size();
      if (comma == std::string_view::npos) throw DataError("curve line " + std::to_string(line_no) + " has too few fields");
      const auto field = line.substr(pos, comma - pos);
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v[f]);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError("curve line " + std::to_string(line_no) + " has a malformed number");
      }
      pos = comma + 1;
    }
    out.push_back({v[0], v[1], v[2], v[3], 0.0});
  }
  if (!header) throw DataError("curve file has no header");
  return out;
}

std::vector<CurvePoint> load_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_curve_csv(ss.str());
}

void check_curve(std::span<const CurvePoint> curve) {
  for (const auto& p : curve) {
    for (double r : {p.recognition, p.error, p.rejection}) {
      if (!(r >= 0.0 && r <= 100.0)) throw InvariantError("curve rate outside [0, 100]");
    }
    if (std::abs(p.recognition + p.error + p.rejection - 100.0) > 1e-9) {
      throw InvariantError("curve rates do not sum to 100");
    }
  }
}

ModelBundle train_models(const Dataset& train, const RunConfig& config, BuildResult* details) {
  config.validate();
  auto result = build(train, config.pipeline());
  ModelBundle bundle;
  bundle.classifier = result.classifier;
  bundle.baseline = train_baseline_mlp(train, config.baseline()).network;
  bundle.training = train;
  bundle.training_digest = training_digest(train);
  if (details) *details = std::move(result);
  return bundle;
}

Curves compute_curves(const ModelBundle& bundle, const Dataset& test, const RunConfig& config) {
  Curves out;
  out.distributed = sweep_network_curve(bundle.classifier, test, config.theta_grid);
  out.knn = sweep_knn_curve(ReferenceSet::from(bundle.training), test, config.knn_ks);
  if (bundle.baseline) out.mlp = sweep_single_mlp_curve(*bundle.baseline, test, config.theta_grid);
  check_curve(out.distributed);
  check_curve(out.knn);
  check_curve(out.mlp);
  return out;
}

std::vector<CurvePoint> average_curves(const std::vector<std::vector<CurvePoint>>& curves) {
  if (curves.empty()) return {};
  std::vector<CurvePoint> out(curves.front().size());
  for (const auto& c : curves) {
    if (c.size() != out.size()) throw InvariantError("curves to average differ in length");
  }
  const double n = static_cast<double>(curves.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].param = curves.front()[i].param;
    for (const auto& c : curves) {
      if (c[i].param != out[i].param) throw InvariantError("curves to average use different grids");
      out[i].recognition += c[i].recognition / n;
      out[i].error += c[i].error / n;
      out[i].rejection += c[i].rejection / n;
      out[i].network_share += c[i].network_share / n;
    }
  }
  return out;
}

CrossvalReport run_crossval(const Dataset& data, const RunConfig& config, const Progress& progress) {
  config.validate();
  const auto folds = kfold_split(data, config.folds, config.seed);
  CrossvalReport report;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (progress) progress("fold " + std::to_string(f + 1) + "/" + std::to_string(folds.size()));
    BuildResult details;
    const auto bundle = train_models(folds[f].train, config, &details);
    FoldReport fold;
    fold.curves = compute_curves(bundle, folds[f].test, config);
    fold.islets = details.partition.islets.size();
    for (const auto& n : bundle.classifier.networks) fold.converged_networks += n.converged ? 1 : 0;
    fold.coverage = islet_coverage(details.partition);
    fold.alpha = details.alpha;
    report.folds.push_back(std::move(fold));
  }
  auto collect = [&](auto member) {
    std::vector<std::vector<CurvePoint>> all;
    for (const auto& f : report.folds) all.push_back(f.curves.*member);
    return average_curves(all);
  };
  report.average.distributed = collect(&Curves::distributed);
  report.average.knn = collect(&Curves::knn);
  report.average.mlp = collect(&Curves::mlp);
  return report;
}

void write_curves(const std::filesystem::path& dir, std::string_view prefix, const Curves& curves,
                  const RunConfig& config) {
  std::filesystem::create_directories(dir);
  const auto hash = config.hash();
  const std::string p(prefix);
  write_atomic(dir / (p + "distributed.csv"), curve_csv(curves.distributed, config.seed, hash));
  write_atomic(dir / (p + "knn.csv"), curve_csv(curves.knn, config.seed, hash));
  if (!curves.mlp.empty()) write_atomic(dir / (p + "mlp.csv"), curve_csv(curves.mlp, config.seed, hash));
}

namespace {

Json point_json(const CurvePoint& p) {
  return Json{{"param", p.param},
              {"recognition", p.recognition},
              {"error", p.error},
              {"rejection", p.rejection},
              {"network_share", p.network_share}};
}

Json best_points(const Curves& c) {
  Json out{{"distributed", point_json(lowest_error_point(c.distributed))}, {"knn", point_json(lowest_error_point(c.knn))}};
  if (!c.mlp.empty()) out["mlp"] = point_json(lowest_error_point(c.mlp));
  return out;
}

}  // namespace

void write_crossval(const std::filesystem::path& dir, const CrossvalReport& report, const RunConfig& config) {
  Json folds = Json::array();
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fold = report.folds[f];
    write_curves(dir, "fold-" + std::to_string(f + 1) + "-", fold.curves, config);
    folds.push_back({{"fold", f + 1},
                     {"islets", fold.islets},
                     {"converged_networks", fold.converged_networks},
                     {"coverage", fold.coverage},
                     {"alpha", fold.alpha},
                     {"lowest_error", best_points(fold.curves)}});
  }
  write_curves(dir, "average-", report.average, config);
  auto summary = make_artifact({"crossval-summary", config.hash(), config.seed});
  summary["folds"] = std::move(folds);
  summary["average_lowest_error"] = best_points(report.average);
  write_json(dir / "summary.json", summary);
}

}  // namespace isletnet
