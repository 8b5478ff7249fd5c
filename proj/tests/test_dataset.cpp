#include <cmath>
#include <limits>

#include "doctest.h"

#include "polyfilter/dataset.hpp"
#include "polyfilter/errors.hpp"
#include "polyfilter/oracles.hpp"
#include "test_support.hpp"

using namespace polyfilter;
using test_support::TempDir;

namespace {

DatasetBundle sample_bundle(bool folds) {
  DatasetBundle b;
  b.name = "sample";
  b.features = oracle::random_matrix(12, 5, 3, 0.0, 2.0);
  for (std::size_t c = 0; c < 5; ++c) b.features(4, c) = 0.0;  // an all-zero row
  b.n_classes = 3;
  for (std::size_t i = 0; i < 12; ++i) b.labels.push_back(static_cast<int>(i % 3));
  b.edges = oracle::random_graph(12, 0.3, 4);
  auto masks_for = [](std::size_t shift) {
    SplitMasks m{std::vector<std::uint8_t>(12), std::vector<std::uint8_t>(12), std::vector<std::uint8_t>(12)};
    for (std::size_t i = 0; i < 12; ++i) {
      const std::size_t r = (i + shift) % 4;
      (r < 2 ? m.train : r == 2 ? m.val : m.test)[i] = 1;
    }
    return m;
  };
  if (folds) {
    Folds f;
    for (std::size_t i = 0; i < kNumFolds; ++i) f.folds.push_back(masks_for(i));
    b.split = f;
  } else {
    b.split = SingleSplit{masks_for(0)};
  }
  return b;
}

std::string load_error(const std::filesystem::path& dir) {
  try {
    load_dataset(dir);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("the shipped toy2 fixture loads") {
  const DatasetBundle b = load_dataset(test_support::fixture_dir("toy2"));
  CHECK(b.name == "toy2");
  CHECK(b.n_nodes() == 2);
  CHECK(b.features.cols == 2);
  CHECK(b.n_classes == 2);
  CHECK(b.edges.edges.size() == 1);
  CHECK_FALSE(b.has_folds());
  CHECK(validate_bundle(b).empty());
}

TEST_CASE("validate_bundle reports single violations") {
  DatasetBundle b = load_dataset(test_support::fixture_dir("toy2"));
  DatasetBundle bad_label = b;
  bad_label.labels[1] = 2;
  CHECK(validate_bundle(bad_label).size() == 1);

  DatasetBundle bad_feature = b;
  bad_feature.features(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(validate_bundle(bad_feature).size() == 1);
}

TEST_CASE("write and load round-trip counts and splits") {
  for (bool folds : {false, true}) {
    TempDir dir("roundtrip");
    const DatasetBundle b = sample_bundle(folds);
    write_dataset(b, dir.path());
    const DatasetBundle l = load_dataset(dir.path());
    CHECK(l.n_nodes() == b.n_nodes());
    CHECK(l.features.cols == b.features.cols);
    CHECK(l.n_classes == b.n_classes);
    CHECK(l.edges.edges == b.edges.edges);
    CHECK(l.labels == b.labels);
    CHECK(l.has_folds() == folds);
    CHECK(l.all_splits().size() == (folds ? kNumFolds : 1));
    CHECK(l.all_splits().back().test == b.all_splits().back().test);
  }
}

TEST_CASE("features are L1 row-normalized on load") {
  TempDir dir("normalize");
  write_dataset(sample_bundle(false), dir.path());
  const DatasetBundle l = load_dataset(dir.path());
  for (std::size_t r = 0; r < l.n_nodes(); ++r) {
    double s = 0.0;
    for (double v : l.features.row(r)) s += std::abs(v);
    CHECK(std::abs(s - (r == 4 ? 0.0 : 1.0)) <= 1e-9);
  }
}

TEST_CASE("overlapping masks are rejected with the node indices") {
  TempDir dir("overlap");
  write_dataset(sample_bundle(false), dir.path());
  std::string masks = test_support::read_file(dir.path() / "masks.csv");
  // Node 0 is a training node; make it a test node as well. Same for node 5.
  masks.replace(0, masks.find('\n'), "train,test");
  std::size_t pos = 0;
  for (int line = 0; line < 5; ++line) pos = masks.find('\n', pos) + 1;
  masks.replace(pos, masks.find('\n', pos) - pos, "train,test");
  test_support::write_file(dir.path() / "masks.csv", masks);
  const std::string err = load_error(dir.path());
  CHECK(err.find("train/test") != std::string::npos);
  CHECK(err.find("0,5") != std::string::npos);
}

TEST_CASE("load errors carry file and line context") {
  SUBCASE("missing file") {
    TempDir dir("missing");
    write_dataset(sample_bundle(false), dir.path());
    std::filesystem::remove(dir.path() / "labels.csv");
    CHECK(load_error(dir.path()).find("labels.csv") != std::string::npos);
  }
  SUBCASE("feature row with the wrong width") {
    TempDir dir("width");
    write_dataset(sample_bundle(false), dir.path());
    std::string f = test_support::read_file(dir.path() / "features.csv");
    f.insert(f.find('\n'), ",1.0");
    test_support::write_file(dir.path() / "features.csv", f);
    const std::string err = load_error(dir.path());
    CHECK(err.find("features.csv:1:") != std::string::npos);
  }
  SUBCASE("label out of range") {
    TempDir dir("label");
    write_dataset(sample_bundle(false), dir.path());
    test_support::write_file(dir.path() / "labels.csv", "0\n1\n2\n7\n1\n2\n0\n1\n2\n0\n1\n2\n");
    CHECK(load_error(dir.path()).find("labels.csv:4:") != std::string::npos);
  }
  SUBCASE("edge outside the node range") {
    TempDir dir("edge");
    write_dataset(sample_bundle(false), dir.path());
    test_support::write_file(dir.path() / "edges.csv", "0,1\n3,12\n");
    CHECK(load_error(dir.path()).find("edges.csv:2:") != std::string::npos);
  }
  SUBCASE("missing fold file") {
    TempDir dir("folds");
    write_dataset(sample_bundle(true), dir.path());
    std::filesystem::remove(dir.path() / "folds" / "fold_7.csv");
    CHECK(load_error(dir.path()).find("fold_7.csv") != std::string::npos);
  }
  SUBCASE("unknown mask role") {
    TempDir dir("role");
    write_dataset(sample_bundle(false), dir.path());
    std::string m = test_support::read_file(dir.path() / "masks.csv");
    m.replace(0, m.find('\n'), "training");
    test_support::write_file(dir.path() / "masks.csv", m);
    CHECK(load_error(dir.path()).find("masks.csv:1:") != std::string::npos);
  }
  SUBCASE("bad split kind") {
    TempDir dir("kind");
    write_dataset(sample_bundle(false), dir.path());
    test_support::write_file(dir.path() / "meta.json",
                             R"({"name":"x","n_nodes":12,"n_features":5,"n_classes":3,"split_kind":"random"})");
    CHECK(load_error(dir.path()).find("split_kind") != std::string::npos);
  }
}
