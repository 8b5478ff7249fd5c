#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "polyfilter/dataset.hpp"
#include "polyfilter/layers.hpp"
#include "polyfilter/parameters.hpp"

namespace polyfilter {

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  int num_bases = 3;
  std::size_t hidden = 16;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  FamilyKind family = FamilyKind::Laguerre;
  int krawtchouk_n = kDefaultKrawtchoukN;
  bool use_layernorm = true;

  /// Throws std::invalid_argument when lr <= 0, dropout outside [0, 1) or epochs < 1.
  void validate() const;
  ModelConfig model_config() const;
};

/// Adam moments for a fixed list of parameters.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// One bias-corrected Adam update with coupled L2 decay (wd·param added to the gradient).
/// grads[i] must match params[i] in size. Moments are allocated on the first call.
void adam_step(AdamState& state, std::span<const ParamRef> params, std::span<const Matrix> grads, double lr,
               double weight_decay);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc = 0.0;  // NaN when the split has no validation nodes
  double test_acc = 0.0;  // NaN when the split has no test nodes
  /// Largest |entry| among the tensors fed to either projection and the layer outputs.
  double max_activation = 0.0;
};

struct RunResult {
  double test_acc = 0.0;  // final epoch
  double best_val_acc = 0.0;
  double best_val_test_acc = 0.0;
  int best_val_epoch = 0;
  std::vector<EpochLog> log;
  std::array<ShapeValues, 2> learned{};  // effective shape parameters per layer
  NodeClassifier model;
};

/// Argmax accuracy over masked rows; ties go to the lowest class index. Throws on an empty mask.
double evaluate_accuracy(const Matrix& log_probs, std::span<const int> labels, std::span<const std::uint8_t> mask);

/// Full-batch training on one train/val/test split. Throws NumericalError on a non-finite loss.
RunResult train_split(const DatasetBundle& data, const SplitMasks& masks, const GraphOperators& ops,
                      const TrainConfig& cfg);

/// train_split on a dataset with a single split.
RunResult train_single_split(const DatasetBundle& data, const TrainConfig& cfg);

struct TenFoldResult {
  double mean = 0.0;
  double std = 0.0;  // sample (n-1) deviation
  std::vector<RunResult> folds;
};

/// Trains each of the ten folds with seed cfg.seed + fold. Runs up to `threads`
/// folds concurrently; results are ordered by fold index.
TenFoldResult run_ten_fold(const DatasetBundle& data, const TrainConfig& cfg, unsigned threads = 1);

double mean_of(std::span<const double> xs);
double sample_std(std::span<const double> xs);

}  // namespace polyfilter
