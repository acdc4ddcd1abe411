#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isletnet {

struct LabeledPoint {
  std::vector<double> features;
  int label = 0;
  std::size_t id = 0;
};

// A labelled sample set. Point ids are always 0..size()-1 and labels index
// into class_names(), so subsets built from one dataset share the label
// numbering of their parent.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::vector<double>> features, std::vector<int> labels,
          std::vector<std::string> class_names);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t dim() const { return dim_; }

  const LabeledPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<LabeledPoint>& points() const { return points_; }
  std::vector<int> labels() const;
  std::set<int> classes() const;
  const std::vector<std::string>& class_names() const { return class_names_; }

  // Points listed in `ids`, renumbered 0..ids.size()-1 in the given order.
  Dataset subset(std::span<const std::size_t> ids) const;

 private:
  std::vector<LabeledPoint> points_;
  std::vector<std::string> class_names_;
  std::size_t dim_ = 0;
};

// Square grey-level image, row-major, values in [0,1].
struct GreyImage {
  std::size_t side = 0;
  std::vector<double> pixels;
};

inline constexpr std::size_t kPyramidLength = 85;

// Four-level resolution pyramid: 1x1, 2x2, 4x4 then 8x8 cells, each level
// row-major. The 8x8 level is an area-weighted resampling of the image and
// every coarser cell is the mean of its four children.
std::vector<double> pyramid_features(const GreyImage& image);

struct CsvOptions {
  bool skip_header = false;
};

// Comma-separated reals with the label in the last column. Blank lines and
// lines starting with '#' are ignored. Labels are mapped to dense ids in
// first-seen order.
Dataset load_csv(const std::filesystem::path& path, CsvOptions options = {});
Dataset parse_csv(std::string_view text, CsvOptions options = {});

// Rows of `dim` unlabeled reals (used for classification queries). Rows with
// dim+1 columns are accepted and their last column ignored.
std::vector<std::vector<double>> load_feature_rows(const std::filesystem::path& path, std::size_t dim,
                                                   CsvOptions options = {});

// Big-endian IDX image (magic 0x803) and label (magic 0x801) files. Every
// image goes through pyramid_features; labels are ordered numerically.
Dataset load_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels);

// Relabels `data` so its label ids index `names`. Throws DataError for a
// class name missing from `names`.
Dataset align_labels(const Dataset& data, const std::vector<std::string>& names);

std::string format_real(double value);
std::string to_csv(const Dataset& data);

struct ClusterSpec {
  std::vector<double> center;
  double spread = 1.0;
  std::size_t count = 0;
};

struct SynthOptions {
  // Gaussian draws are kept only inside this many spreads of the centre; 0
  // disables the truncation.
  double truncation = 2.0;
};

// One isotropic Gaussian blob per entry of `specs`, labelled by its index.
Dataset synth_density_variation(std::span<const ClusterSpec> specs, std::uint64_t seed,
                                SynthOptions options = {});

// Three sparse clusters on a wide triangle with three dense clusters (a tenth
// of the spread) packed together at its centre.
std::vector<ClusterSpec> fig2_preset();

struct Fold {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> test_ids;
};

// Seeded shuffle followed by contiguous chunking; the first n % folds test
// sets receive one extra point.
std::vector<Fold> kfold_split(const Dataset& data, std::size_t folds, std::uint64_t seed);

}  // namespace isletnet
