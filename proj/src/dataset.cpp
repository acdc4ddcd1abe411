#include "isletnet/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "isletnet/errors.hpp"

namespace isletnet {

Dataset::Dataset(std::vector<std::vector<double>> features, std::vector<int> labels,
                 std::vector<std::string> class_names)
    : class_names_(std::move(class_names)) {
  if (features.size() != labels.size()) {
    throw DataError("feature rows and labels differ in count");
  }
  if (!features.empty()) dim_ = features.front().size();
  points_.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].empty()) throw DataError("point " + std::to_string(i) + " has no features");
    if (features[i].size() != dim_) {
      throw DataError("point " + std::to_string(i) + " has dimension " + std::to_string(features[i].size()) +
                      ", expected " + std::to_string(dim_));
    }
    for (double v : features[i]) {
      if (!std::isfinite(v)) throw DataError("point " + std::to_string(i) + " has a non-finite feature");
    }
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_names_.size()) {
      throw DataError("point " + std::to_string(i) + " has an unknown label id");
    }
    points_.push_back({std::move(features[i]), labels[i], i});
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.label);
  return out;
}

std::set<int> Dataset::classes() const {
  std::set<int> out;
  for (const auto& p : points_) out.insert(p.label);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> ids) const {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  features.reserve(ids.size());
  labels.reserve(ids.size());
  for (std::size_t id : ids) {
    if (id >= points_.size()) throw ConfigError("subset id out of range");
    features.push_back(points_[id].features);
    labels.push_back(points_[id].label);
  }
  return Dataset(std::move(features), std::move(labels), class_names_);
}

namespace {

// Row r of the result holds the fraction of output cell r covered by each
// input pixel.
std::vector<double> area_weights(std::size_t in, std::size_t out) {
  std::vector<double> w(out * in, 0.0);
  const double cell = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t r = 0; r < out; ++r) {
    const double lo = static_cast<double>(r) * cell;
    const double hi = lo + cell;
    for (std::size_t i = 0; i < in; ++i) {
      const double overlap = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
      if (overlap > 0.0) w[r * in + i] = overlap / cell;
    }
  }
  return w;
}

}  // namespace

std::vector<double> pyramid_features(const GreyImage& image) {
  const std::size_t g = image.side;
  if (g < 8) throw DataError("pyramid input must be at least 8x8");
  if (image.pixels.size() != g * g) throw DataError("pyramid input is not a square grid");
  for (double v : image.pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("grey level outside [0,1]");
  }

  const auto w = area_weights(g, 8);
  // rows first, then columns
  std::vector<double> tmp(8 * g, 0.0);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t i = 0; i < g; ++i) {
      const double wr = w[r * g + i];
      if (wr == 0.0) continue;
      for (std::size_t c = 0; c < g; ++c) tmp[r * g + c] += wr * image.pixels[i * g + c];
    }
  }
  std::array<double, 64> fine{};
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 8; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < g; ++j) acc += w[c * g + j] * tmp[r * g + j];
      fine[r * 8 + c] = std::clamp(acc, 0.0, 1.0);
    }
  }

  std::vector<std::vector<double>> levels;
  levels.emplace_back(fine.begin(), fine.end());
  for (std::size_t side = 4; side >= 1; side /= 2) {
    const auto& child = levels.back();
    const std::size_t cs = side * 2;
    std::vector<double> level(side * side);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        level[r * side + c] = 0.25 * (child[(2 * r) * cs + 2 * c] + child[(2 * r) * cs + 2 * c + 1] +
                                      child[(2 * r + 1) * cs + 2 * c] + child[(2 * r + 1) * cs + 2 * c + 1]);
      }
    }
    levels.push_back(std::move(level));
  }

  std::vector<double> out;
  out.reserve(kPyramidLength);
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) out.insert(out.end(), it->begin(), it->end());
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "' as a number");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
void for_each_row(std::string_view text, CsvOptions options, Fn&& fn) {
  std::size_t line_no = 0;
  bool header_pending = options.skip_header;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (header_pending) {
      header_pending = false;
    } else {
      fn(split_fields(line), line_no);
    }
    if (end == text.size()) break;
  }
}

}  // namespace

Dataset parse_csv(std::string_view text, CsvOptions options) {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<std::string> names;
  std::map<std::string, int, std::less<>> ids;
  for_each_row(text, options, [&](const std::vector<std::string_view>& fields, std::size_t line_no) {
    if (fields.size() < 2) throw DataError("line " + std::to_string(line_no) + ": need at least one feature and a label");
    if (!features.empty() && fields.size() - 1 != features.front().size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(features.front().size()) +
                      " features, found " + std::to_string(fields.size() - 1));
    }
    std::vector<double> row;
    row.reserve(fields.size() - 1);
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) row.push_back(parse_real(fields[i], line_no));
    const auto label = fields.back();
    if (label.empty()) throw DataError("line " + std::to_string(line_no) + ": empty label");
    auto it = ids.find(label);
    if (it == ids.end()) {
      it = ids.emplace(std::string(label), static_cast<int>(names.size())).first;
      names.emplace_back(label);
    }
    features.push_back(std::move(row));
    labels.push_back(it->second);
  });
  if (features.empty()) throw DataError("CSV input contains no data rows");
  return Dataset(std::move(features), std::move(labels), std::move(names));
}

Dataset load_csv(const std::filesystem::path& path, CsvOptions options) {
  try {
    return parse_csv(read_file(path), options);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<std::vector<double>> load_feature_rows(const std::filesystem::path& path, std::size_t dim,
                                                   CsvOptions options) {
  const auto text = read_file(path);
  std::vector<std::vector<double>> rows;
  for_each_row(text, options, [&](const std::vector<std::string_view>& fields, std::size_t line_no) {
    if (fields.size() != dim && fields.size() != dim + 1) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " features, found " + std::to_string(fields.size()) + " columns");
    }
    std::vector<double> row;
    row.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      row.push_back(parse_real(fields[i], line_no));
      if (!std::isfinite(row.back())) throw DataError(path.string() + ": non-finite feature");
    }
    rows.push_back(std::move(row));
  });
  if (rows.empty()) throw DataError(path.string() + ": no query rows");
  return rows;
}

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw DataError("truncated IDX header");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

}  // namespace

Dataset load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  if (read_be32(img, 0) != 0x00000803) throw DataError(images.string() + ": not an IDX3 ubyte image file");
  if (read_be32(lab, 0) != 0x00000801) throw DataError(labels.string() + ": not an IDX1 ubyte label file");
  const std::size_t count = read_be32(img, 4);
  const std::size_t rows = read_be32(img, 8);
  const std::size_t cols = read_be32(img, 12);
  const std::size_t label_count = read_be32(lab, 4);
  if (count != label_count) {
    throw DataError("image count " + std::to_string(count) + " does not match label count " +
                    std::to_string(label_count));
  }
  if (count == 0) throw DataError(images.string() + ": no images");
  if (rows != cols) throw DataError(images.string() + ": images are not square");
  if (img.size() != 16 + count * rows * cols) throw DataError(images.string() + ": unexpected file size");
  if (lab.size() != 8 + count) throw DataError(labels.string() + ": unexpected file size");

  std::vector<int> raw(count);
  std::set<int> seen;
  for (std::size_t i = 0; i < count; ++i) {
    raw[i] = static_cast<unsigned char>(lab[8 + i]);
    seen.insert(raw[i]);
  }
  std::vector<std::string> names;
  std::map<int, int> dense;
  for (int v : seen) {
    dense[v] = static_cast<int>(names.size());
    names.push_back(std::to_string(v));
  }

  std::vector<std::vector<double>> features;
  std::vector<int> labels_out;
  features.reserve(count);
  GreyImage image{rows, std::vector<double>(rows * cols)};
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t base = 16 + i * rows * cols;
    for (std::size_t p = 0; p < rows * cols; ++p) {
      image.pixels[p] = static_cast<unsigned char>(img[base + p]) / 255.0;
    }
    features.push_back(pyramid_features(image));
    labels_out.push_back(dense[raw[i]]);
  }
  return Dataset(std::move(features), std::move(labels_out), std::move(names));
}

Dataset align_labels(const Dataset& data, const std::vector<std::string>& names) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], static_cast<int>(i));
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  features.reserve(data.size());
  labels.reserve(data.size());
  for (const auto& p : data.points()) {
    const auto& name = data.class_names()[static_cast<std::size_t>(p.label)];
    const auto it = index.find(name);
    if (it == index.end()) throw DataError("class '" + name + "' is unknown to the model");
    features.push_back(p.features);
    labels.push_back(it->second);
  }
  return Dataset(std::move(features), std::move(labels), names);
}

std::string format_real(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw InvariantError("cannot format real");
  return std::string(buf.data(), ptr);
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (const auto& p : data.points()) {
    for (double v : p.features) {
      out += format_real(v);
      out += ',';
    }
    out += data.class_names()[static_cast<std::size_t>(p.label)];
    out += '\n';
  }
  return out;
}

Dataset synth_density_variation(std::span<const ClusterSpec> specs, std::uint64_t seed, SynthOptions options) {
  if (specs.empty()) throw ConfigError("synthetic spec has no clusters");
  const std::size_t dim = specs.front().center.size();
  if (dim == 0) throw ConfigError("cluster centre has no coordinates");
  if (options.truncation < 0.0) throw ConfigError("truncation must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<std::string> names;
  const double limit2 = options.truncation * options.truncation;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto& spec = specs[c];
    if (spec.center.size() != dim) throw ConfigError("cluster centres differ in dimension");
    if (spec.count == 0) throw ConfigError("cluster count must be > 0");
    if (!(spec.spread > 0.0)) throw ConfigError("cluster spread must be > 0");
    names.push_back(std::to_string(c));
    for (std::size_t i = 0; i < spec.count; ++i) {
      std::vector<double> z(dim);
      for (;;) {
        double r2 = 0.0;
        for (auto& v : z) {
          v = normal(rng);
          r2 += v * v;
        }
        if (options.truncation == 0.0 || r2 < limit2) break;
      }
      for (std::size_t d = 0; d < dim; ++d) z[d] = spec.center[d] + spec.spread * z[d];
      features.push_back(std::move(z));
      labels.push_back(static_cast<int>(c));
    }
  }
  return Dataset(std::move(features), std::move(labels), std::move(names));
}

std::vector<ClusterSpec> fig2_preset() {
  constexpr double side = 10.0;
  constexpr double inner = 1.0;
  constexpr double h = 0.8660254037844386;  // sqrt(3)/2
  const double gx = side / 2.0;
  const double gy = side * h / 3.0;
  return {
      {{0.0, 0.0}, 1.0, 40},
      {{side, 0.0}, 1.0, 40},
      {{side / 2.0, side * h}, 1.0, 40},
      {{gx - inner / 2.0, gy - inner * h / 3.0}, 0.1, 40},
      {{gx + inner / 2.0, gy - inner * h / 3.0}, 0.1, 40},
      {{gx, gy + 2.0 * inner * h / 3.0}, 0.1, 40},
  };
}

std::vector<Fold> kfold_split(const Dataset& data, std::size_t folds, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (folds < 2) throw ConfigError("need at least 2 folds");
  if (folds > n) throw ConfigError("more folds (" + std::to_string(folds) + ") than points (" + std::to_string(n) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Fold> out;
  out.reserve(folds);
  std::size_t start = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t len = n / folds + (f < n % folds ? 1 : 0);
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(start),
                                  order.begin() + static_cast<std::ptrdiff_t>(start + len));
    std::sort(test.begin(), test.end());
    std::vector<char> in_test(n, 0);
    for (auto id : test) in_test[id] = 1;
    std::vector<std::size_t> train;
    train.reserve(n - len);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i]) train.push_back(i);
    }
    Fold fold;
    fold.train = data.subset(train);
    fold.test = data.subset(test);
    fold.train_ids = std::move(train);
    fold.test_ids = std::move(test);
    out.push_back(std::move(fold));
    start += len;
  }
  return out;
}

}  // namespace isletnet
