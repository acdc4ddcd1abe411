#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "isletnet/dataset.hpp"
#include "isletnet/errors.hpp"
#include "oracles.hpp"

using namespace isletnet;

namespace {

// Offsets of each pyramid level inside the 85-vector.
constexpr std::size_t kLevel1 = 0;
constexpr std::size_t kLevel2 = 1;
constexpr std::size_t kLevel4 = 5;
constexpr std::size_t kLevel8 = 21;

GreyImage constant_image(std::size_t side, double v) { return {side, std::vector<double>(side * side, v)}; }

double within_cluster_mean_distance(const Dataset& data, int label) {
  std::vector<const LabeledPoint*> pts;
  for (const auto& p : data.points()) {
    if (p.label == label) pts.push_back(&p);
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double acc = 0.0;
      for (std::size_t d = 0; d < data.dim(); ++d) {
        acc += std::pow(pts[i]->features[d] - pts[j]->features[d], 2);
      }
      sum += std::sqrt(acc);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("pyramid of constant images") {
  auto zeros = pyramid_features(constant_image(8, 0.0));
  CHECK(zeros.size() == kPyramidLength);
  CHECK(std::all_of(zeros.begin(), zeros.end(), [](double v) { return v == 0.0; }));
  auto ones = pyramid_features(constant_image(8, 1.0));
  CHECK(std::all_of(ones.begin(), ones.end(), [](double v) { return v == doctest::Approx(1.0); }));
  auto big = pyramid_features(constant_image(13, 1.0));
  CHECK(std::all_of(big.begin(), big.end(), [](double v) { return v == doctest::Approx(1.0); }));
}

TEST_CASE("pyramid of a single lit pixel") {
  auto img = constant_image(8, 0.0);
  img.pixels[2 * 8 + 5] = 1.0;
  const auto f = pyramid_features(img);
  CHECK(f[kLevel8 + 2 * 8 + 5] == 1.0);
  CHECK(std::count(f.begin() + kLevel8, f.end(), 0.0) == 63);
  CHECK(f[kLevel4 + 1 * 4 + 2] == 0.25);
  CHECK(f[kLevel2 + 0 * 2 + 1] == 0.0625);
  CHECK(f[kLevel1] == 0.015625);
}

TEST_CASE("pyramid coarse cells are the mean of their children") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t side : {8u, 9u, 16u, 28u}) {
    GreyImage img{side, std::vector<double>(side * side)};
    for (auto& v : img.pixels) v = u(rng);
    const auto f = pyramid_features(img);
    REQUIRE(f.size() == kPyramidLength);
    const std::size_t offsets[] = {kLevel1, kLevel2, kLevel4, kLevel8};
    for (std::size_t level = 0; level < 3; ++level) {
      const std::size_t s = std::size_t{1} << level;
      for (std::size_t r = 0; r < s; ++r) {
        for (std::size_t c = 0; c < s; ++c) {
          const auto* child = &f[offsets[level + 1]];
          const double mean = (child[2 * r * 2 * s + 2 * c] + child[2 * r * 2 * s + 2 * c + 1] +
                               child[(2 * r + 1) * 2 * s + 2 * c] + child[(2 * r + 1) * 2 * s + 2 * c + 1]) /
                              4.0;
          CHECK(f[offsets[level] + r * s + c] == doctest::Approx(mean).epsilon(1e-12));
        }
      }
    }
    for (double v : f) CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("pyramid of a 16x16 image averages 2x2 blocks at the finest level") {
  GreyImage img{16, std::vector<double>(256)};
  for (std::size_t i = 0; i < 256; ++i) img.pixels[i] = static_cast<double>(i % 7) / 6.0;
  const auto f = pyramid_features(img);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 8; ++c) {
      const double mean = (img.pixels[(2 * r) * 16 + 2 * c] + img.pixels[(2 * r) * 16 + 2 * c + 1] +
                           img.pixels[(2 * r + 1) * 16 + 2 * c] + img.pixels[(2 * r + 1) * 16 + 2 * c + 1]) /
                          4.0;
      CHECK(f[kLevel8 + r * 8 + c] == doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("pyramid rejects bad grids") {
  CHECK_THROWS_AS(pyramid_features({8, std::vector<double>(63, 0.0)}), DataError);
  CHECK_THROWS_AS(pyramid_features(constant_image(7, 0.0)), DataError);
  auto img = constant_image(8, 0.0);
  img.pixels[3] = 1.5;
  CHECK_THROWS_AS(pyramid_features(img), DataError);
}

TEST_CASE("csv parsing") {
  const auto d = parse_csv("0,0,A\n3,4,A\n0,5,B");
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.classes().size() == 2);
  CHECK(d.class_names() == std::vector<std::string>{"A", "B"});
  CHECK(d[1].id == 1);
  CHECK(d[2].label == 1);
  CHECK(d[1].features == std::vector<double>{3.0, 4.0});

  CHECK_THROWS_AS(parse_csv(""), DataError);
  CHECK_THROWS_AS(parse_csv("# only a comment\n\n"), DataError);
  CHECK_THROWS_AS(parse_csv("1,2,A\n1,B\n"), DataError);
  CHECK_THROWS_AS(parse_csv("1,x,A\n"), DataError);

  const auto h = parse_csv("x,y,label\n1,2,B\n# note\n\n3,4,A\n", {true});
  CHECK(h.size() == 2);
  CHECK(h.class_names() == std::vector<std::string>{"B", "A"});
}

TEST_CASE("csv round trip is exact") {
  const auto d = synth_density_variation(fig2_preset(), 3);
  const auto back = parse_csv(to_csv(d));
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].features == d[i].features);
    CHECK(back.class_names()[back[i].label] == d.class_names()[d[i].label]);
  }
}

TEST_CASE("align_labels maps class names") {
  const auto d = parse_csv("1,B\n2,A\n");
  const auto a = align_labels(d, {"A", "B", "C"});
  CHECK(a[0].label == 1);
  CHECK(a[1].label == 0);
  CHECK_THROWS_AS(align_labels(d, {"A"}), DataError);
}

TEST_CASE("idx digits load through the pyramid") {
  const auto d = oracle::digits();
  CHECK(d.size() == 1797);
  CHECK(d.dim() == kPyramidLength);
  CHECK(d.class_names().size() == 10);
  for (const auto& p : d.points()) {
    for (double v : p.features) REQUIRE((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("idx image pair of ten digits") {
  // Rewrite the first ten digits as a standalone pair and compare with the
  // pyramid of the raw bytes.
  const std::string dir = ISLETNET_TEST_DATA;
  std::ifstream img(dir + "/digits-images-idx3-ubyte", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(img)), {});
  const auto tmp = std::filesystem::temp_directory_path() / "isletnet-idx-test";
  std::filesystem::create_directories(tmp);
  std::string head = bytes.substr(0, 16);
  head[4] = head[5] = head[6] = 0;
  head[7] = 10;
  {
    std::ofstream out(tmp / "img", std::ios::binary);
    out << head << bytes.substr(16, 640);
    std::ofstream lab(tmp / "lab", std::ios::binary);
    const char lhead[8] = {0, 0, 8, 1, 0, 0, 0, 10};
    lab.write(lhead, 8);
    for (char c = 0; c < 10; ++c) lab.put(c);
  }
  const auto d = load_idx_pair(tmp / "img", tmp / "lab");
  CHECK(d.size() == 10);
  CHECK(d.dim() == 85);
  for (std::size_t i = 0; i < 10; ++i) {
    GreyImage g{8, std::vector<double>(64)};
    for (std::size_t p = 0; p < 64; ++p) g.pixels[p] = static_cast<unsigned char>(bytes[16 + i * 64 + p]) / 255.0;
    CHECK(d[i].features == pyramid_features(g));
    CHECK(d[i].label == static_cast<int>(i));
  }
  {
    std::ofstream lab(tmp / "lab", std::ios::binary);
    const char lhead[8] = {0, 0, 8, 1, 0, 0, 0, 9};
    lab.write(lhead, 8);
    for (char c = 0; c < 9; ++c) lab.put(c);
  }
  CHECK_THROWS_AS(load_idx_pair(tmp / "img", tmp / "lab"), DataError);
  std::filesystem::remove_all(tmp);
}

TEST_CASE("synthetic generation") {
  const std::vector<ClusterSpec> one{{{1.0, 2.0}, 0.5, 5}};
  const auto d = synth_density_variation(one, 1);
  CHECK(d.size() == 5);
  CHECK(d.classes().size() == 1);

  const auto a = synth_density_variation(fig2_preset(), 0);
  const auto b = synth_density_variation(fig2_preset(), 0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].features == b[i].features);
  CHECK(a.classes().size() == 6);

  const auto specs = fig2_preset();
  double sparse = 0.0;
  double dense = 0.0;
  for (int c = 0; c < 6; ++c) {
    const double m = within_cluster_mean_distance(a, c);
    if (specs[static_cast<std::size_t>(c)].spread >= 1.0) {
      sparse = std::max(sparse, m);
    } else {
      dense = std::max(dense, m);
    }
  }
  CHECK(dense < sparse / 5.0);
  for (std::size_t c = 3; c < 6; ++c) CHECK(specs[c].spread <= specs[0].spread / 10.0);

  CHECK_THROWS_AS(synth_density_variation(std::vector<ClusterSpec>{{{0.0}, 0.0, 3}}, 0), ConfigError);
  CHECK_THROWS_AS(synth_density_variation(std::vector<ClusterSpec>{{{0.0}, 1.0, 0}}, 0), ConfigError);
}

TEST_CASE("kfold splits") {
  std::vector<std::vector<double>> f;
  std::vector<int> l;
  for (int i = 0; i < 11; ++i) {
    f.push_back({static_cast<double>(i)});
    l.push_back(i % 2);
  }
  const Dataset eleven(f, l, {"a", "b"});
  const auto folds = kfold_split(eleven, 5, 4);
  std::vector<std::size_t> sizes;
  std::vector<int> seen(11, 0);
  for (const auto& fold : folds) {
    sizes.push_back(fold.test.size());
    CHECK(fold.train.size() + fold.test.size() == 11);
    for (auto id : fold.test_ids) ++seen[id];
    for (std::size_t i = 0; i < fold.test_ids.size(); ++i) {
      CHECK(fold.test[i].features == eleven[fold.test_ids[i]].features);
    }
    std::vector<std::size_t> all = fold.train_ids;
    all.insert(all.end(), fold.test_ids.begin(), fold.test_ids.end());
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(all.size() == 11);
  }
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{2, 2, 2, 2, 3});
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  const Dataset ten(std::vector<std::vector<double>>(f.begin(), f.begin() + 10), std::vector<int>(l.begin(), l.begin() + 10),
                    {"a", "b"});
  for (const auto& fold : kfold_split(ten, 5, 0)) {
    CHECK(fold.train.size() == 8);
    CHECK(fold.test.size() == 2);
  }
  for (const auto& fold : kfold_split(ten, 10, 0)) CHECK(fold.test.size() == 1);
  CHECK(kfold_split(ten, 5, 9)[0].test_ids == kfold_split(ten, 5, 9)[0].test_ids);
  CHECK_THROWS_AS(kfold_split(ten, 11, 0), ConfigError);
  CHECK_THROWS_AS(kfold_split(ten, 1, 0), ConfigError);
}
