#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "polyfilter/matrix.hpp"
#include "polyfilter/sparse.hpp"

namespace polyfilter {

/// Node membership in train / val / test. One byte per node, 0 or 1.
struct SplitMasks {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> val;
  std::vector<std::uint8_t> test;
};

struct SingleSplit {
  SplitMasks masks;
};

struct Folds {
  std::vector<SplitMasks> folds;
};

inline constexpr std::size_t kNumFolds = 10;

struct DatasetBundle {
  std::string name;
  Matrix features;  // n x f
  std::vector<int> labels;
  std::size_t n_classes = 0;
  EdgeList edges;
  std::variant<SingleSplit, Folds> split;

  std::size_t n_nodes() const { return features.rows; }
  bool has_folds() const { return std::holds_alternative<Folds>(split); }
  /// Every split this bundle defines: one for a single split, ten for folds.
  std::vector<SplitMasks> all_splits() const;
};

/// Reads a dataset directory (meta.json, edges.csv, features.csv, labels.csv and
/// masks.csv or folds/fold_{0..9}.csv), validates it and L1-normalizes nonzero
/// feature rows. Throws DataError with file and line context.
DatasetBundle load_dataset(const std::filesystem::path& dir);

/// Human-readable invariant violations; empty when the bundle is consistent.
std::vector<std::string> validate_bundle(const DatasetBundle& b);

/// Scales every nonzero row to unit L1 norm.
void normalize_feature_rows(Matrix& features);

/// Writes the bundle in the directory format read by load_dataset.
void write_dataset(const DatasetBundle& b, const std::filesystem::path& dir);

}  // namespace polyfilter
