#include "isletnet/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "isletnet/errors.hpp"

namespace isletnet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
                    std::string(expected) + ")");
}

double to_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "a real number");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::size_t to_count(std::string_view key, std::string_view v) { return static_cast<std::size_t>(to_u64(key, v)); }

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::size_t> to_counts(std::string_view key, std::string_view v, char sep) {
  std::vector<std::size_t> out;
  for (auto part : split(v, sep)) out.push_back(to_count(key, part));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values, char sep, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += fmt(values[i]);
  }
  return out;
}

std::string count_list(const std::vector<std::size_t>& v, char sep) {
  return join<std::size_t>(v, sep, [](const std::size_t& x) { return std::to_string(x); });
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;  // empty for paths
};

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"seed", {[](RunConfig& c, auto k, auto v) { c.seed = to_u64(k, v); },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"linkage", {[](RunConfig& c, auto, auto v) { c.linkage = parse_linkage_kind(std::string(v)); },
                   [](const RunConfig& c) { return to_string(c.linkage); }}},
      {"linkage_beta", {[](RunConfig& c, auto k, auto v) { c.linkage_beta = to_real(k, v); },
                        [](const RunConfig& c) { return format_real(c.linkage_beta); }}},
      {"alpha", {[](RunConfig& c, auto k, auto v) { c.alpha = to_real(k, v); },
                 [](const RunConfig& c) { return format_real(c.alpha); }}},
      {"bins", {[](RunConfig& c, auto k, auto v) { c.bins = to_count(k, v); },
                [](const RunConfig& c) { return std::to_string(c.bins); }}},
      {"min_nodes", {[](RunConfig& c, auto k, auto v) { c.min_nodes = to_count(k, v); },
                     [](const RunConfig& c) { return std::to_string(c.min_nodes); }}},
      {"alpha_search", {[](RunConfig& c, auto k, auto v) { c.alpha_search = to_bool(k, v); },
                        [](const RunConfig& c) { return bool_text(c.alpha_search); }}},
      {"alpha_hi", {[](RunConfig& c, auto k, auto v) { c.alpha_hi = to_real(k, v); },
                    [](const RunConfig& c) { return format_real(c.alpha_hi); }}},
      {"alpha_iterations", {[](RunConfig& c, auto k, auto v) { c.alpha_iterations = to_count(k, v); },
                            [](const RunConfig& c) { return std::to_string(c.alpha_iterations); }}},
      {"islet_min_size", {[](RunConfig& c, auto k, auto v) { c.islet_min_size = to_count(k, v); },
                          [](const RunConfig& c) { return std::to_string(c.islet_min_size); }}},
      {"learning_rate", {[](RunConfig& c, auto k, auto v) { c.learning_rate = to_real(k, v); },
                         [](const RunConfig& c) { return format_real(c.learning_rate); }}},
      {"momentum", {[](RunConfig& c, auto k, auto v) { c.momentum = to_real(k, v); },
                    [](const RunConfig& c) { return format_real(c.momentum); }}},
      {"max_epochs", {[](RunConfig& c, auto k, auto v) { c.max_epochs = to_count(k, v); },
                      [](const RunConfig& c) { return std::to_string(c.max_epochs); }}},
      {"success_threshold", {[](RunConfig& c, auto k, auto v) { c.success_threshold = to_real(k, v); },
                             [](const RunConfig& c) { return format_real(c.success_threshold); }}},
      {"ladder", {[](RunConfig& c, auto k, auto v) {
                    Ladder ladder;
                    for (auto rung : split(v, ',')) ladder.push_back(to_counts(k, rung, '-'));
                    c.ladder = std::move(ladder);
                  },
                  [](const RunConfig& c) {
                    return join<std::vector<std::size_t>>(c.ladder, ',',
                                                          [](const auto& rung) { return count_list(rung, '-'); });
                  }}},
      {"negative_ratio", {[](RunConfig& c, auto k, auto v) { c.negative_ratio = to_real(k, v); },
                          [](const RunConfig& c) { return format_real(c.negative_ratio); }}},
      {"refset", {[](RunConfig& c, auto, auto v) { c.refset = parse_refset_choice(std::string(v)); },
                  [](const RunConfig& c) { return to_string(c.refset); }}},
      {"knn_k", {[](RunConfig& c, auto k, auto v) { c.knn_k = to_count(k, v); },
                 [](const RunConfig& c) { return std::to_string(c.knn_k); }}},
      {"theta", {[](RunConfig& c, auto k, auto v) { c.theta = to_real(k, v); },
                 [](const RunConfig& c) { return format_real(c.theta); }}},
      {"max_output_tiebreak", {[](RunConfig& c, auto k, auto v) { c.max_output_tiebreak = to_bool(k, v); },
                               [](const RunConfig& c) { return bool_text(c.max_output_tiebreak); }}},
      {"theta_grid", {[](RunConfig& c, auto k, auto v) {
                        if (v == "default") {
                          c.theta_grid = default_theta_grid();
                          return;
                        }
                        c.theta_grid.clear();
                        for (auto part : split(v, ',')) c.theta_grid.push_back(to_real(k, part));
                      },
                      [](const RunConfig& c) {
                        return join<double>(c.theta_grid, ',', [](const double& x) { return format_real(x); });
                      }}},
      {"knn_ks", {[](RunConfig& c, auto k, auto v) { c.knn_ks = to_counts(k, v, ','); },
                  [](const RunConfig& c) { return count_list(c.knn_ks, ','); }}},
      {"mlp_hidden", {[](RunConfig& c, auto k, auto v) { c.mlp_hidden = to_counts(k, v, '-'); },
                      [](const RunConfig& c) { return count_list(c.mlp_hidden, '-'); }}},
      {"mlp_epochs", {[](RunConfig& c, auto k, auto v) { c.mlp_epochs = to_count(k, v); },
                      [](const RunConfig& c) { return std::to_string(c.mlp_epochs); }}},
      {"folds", {[](RunConfig& c, auto k, auto v) { c.folds = to_count(k, v); },
                 [](const RunConfig& c) { return std::to_string(c.folds); }}},
      {"data_csv", {[](RunConfig& c, auto, auto v) { c.data_csv = std::string(v); }, nullptr}},
      {"data_images", {[](RunConfig& c, auto, auto v) { c.data_images = std::string(v); }, nullptr}},
      {"data_labels", {[](RunConfig& c, auto, auto v) { c.data_labels = std::string(v); }, nullptr}},
      {"output_dir", {[](RunConfig& c, auto, auto v) { c.output_dir = std::string(v); }, nullptr}},
  };
  return table;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second.set(*this, key, trim(value));
}

void RunConfig::validate() const {
  pipeline().validate();
  if (theta_grid.empty()) throw ConfigError("theta_grid is empty");
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] >= 0.0 && theta_grid[i] <= 1.0)) throw ConfigError("theta_grid values must lie in [0, 1]");
    if (i > 0 && theta_grid[i] < theta_grid[i - 1]) throw ConfigError("theta_grid must be ascending");
  }
  if (knn_ks.empty()) throw ConfigError("knn_ks is empty");
  for (auto k : knn_ks) {
    if (k < 1) throw ConfigError("knn_ks values must be >= 1");
  }
  Layout{1, mlp_hidden, 1}.validate();
  if (mlp_epochs < 1) throw ConfigError("mlp_epochs must be >= 1");
  if (folds < 2) throw ConfigError("folds must be >= 2");
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [key, field] : fields()) {
    if (!field.get) continue;
    out += key;
    out += '=';
    out += field.get(*this);
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

Linkage RunConfig::linkage_params() const {
  switch (linkage) {
    case LinkageKind::single: return Linkage::single();
    case LinkageKind::complete: return Linkage::complete();
    case LinkageKind::average: return Linkage::average();
    case LinkageKind::flexible: return Linkage::flexible(linkage_beta);
  }
  throw ConfigError("unknown linkage");
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.linkage = linkage_params();
  p.cut = {alpha, bins, min_nodes};
  if (alpha_search) p.alpha_search = AlphaSearch{alpha_hi, alpha_iterations};
  p.islets.min_size = islet_min_size;
  p.train = {learning_rate, momentum, max_epochs, success_threshold, seed};
  p.ladder = ladder;
  p.negative_ratio = negative_ratio;
  p.refset = refset;
  p.k = knn_k;
  p.theta = theta;
  p.max_output_tiebreak = max_output_tiebreak;
  p.seed = seed;
  return p;
}

BaselineConfig RunConfig::baseline() const {
  BaselineConfig b;
  b.hidden = mlp_hidden;
  b.train = {learning_rate, momentum, mlp_epochs, success_threshold, derive_seed(seed, 0xba5e)};
  return b;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    auto line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    try {
      cfg.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace isletnet
