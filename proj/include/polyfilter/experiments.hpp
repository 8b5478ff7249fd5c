#pragma once

// Experiment drivers behind the command-line subcommands. Each one trains,
// writes its CSV outputs into an output directory and returns the rows it wrote.

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "polyfilter/train.hpp"

namespace polyfilter {

inline constexpr std::string_view kSummaryHeader =
    "dataset,family,K,H,seed,acc_mean,acc_std,alpha_layer1,alpha_layer2,beta_layer1,beta_layer2,c_layer1,c_layer2,"
    "p_layer1,p_layer2";
inline constexpr std::string_view kEpochLogHeader = "epoch,train_loss,val_acc,test_acc";
inline constexpr std::string_view kAblateKHeader = "k,family,acc";
inline constexpr std::string_view kAblateHHeader = "h,family,acc";
inline constexpr std::string_view kAlphaHeader = "dataset,alpha_layer1,alpha_layer2";

/// TrainConfig::epochs value that selects the protocol default: 400 epochs for
/// ten-fold datasets, 200 for single-split ones.
inline constexpr int kAutoEpochs = 0;

/// A dataset argument that names an existing directory is used as is. Otherwise
/// it is looked up as $POLYFILTER_DATA_DIR/<arg> and then ./data/<arg>. Throws
/// DataError when none exists.
std::filesystem::path resolve_dataset(const std::string& arg);

/// Runs fn(0), ..., fn(n-1) on up to `threads` workers and rethrows the first
/// exception once all workers have finished.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Worker count from POLYFILTER_THREADS, defaulting to the hardware concurrency.
unsigned thread_cap();

/// Accuracy and learned shape parameters of one configuration on one dataset.
/// For fold datasets accuracy and shape parameters are averaged over the folds.
struct Outcome {
  std::string dataset;
  TrainConfig cfg;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  std::array<ShapeValues, 2> learned{};
  std::vector<RunResult> runs;  // one per split
};

/// Trains on every split the dataset defines. Resolves kAutoEpochs.
Outcome run_experiment(const DatasetBundle& data, const TrainConfig& cfg, unsigned threads);

std::string summary_row(const Outcome& o);
std::string epoch_log_csv(const RunResult& r);

/// Replaces `file` with `content` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

/// Writes summary.csv, one epoch log, checkpoint and learned_params file per
/// split (suffixed _fold{i} for fold datasets).
Outcome cmd_train(const std::string& dataset, const TrainConfig& cfg, const std::filesystem::path& out,
                  unsigned threads);

struct AblationRow {
  int value = 0;  // K or H
  FamilyKind family = FamilyKind::Laguerre;
  double acc = 0.0;
};

/// One run per (family, K) with cfg's other settings; writes ablate_k.csv.
std::vector<AblationRow> cmd_ablate_k(const std::string& dataset, const std::vector<FamilyKind>& families,
                                      const std::vector<int>& ks, const TrainConfig& cfg,
                                      const std::filesystem::path& out, unsigned threads);

/// One run per (family, H) with cfg's other settings; writes ablate_h.csv.
std::vector<AblationRow> cmd_ablate_h(const std::string& dataset, const std::vector<FamilyKind>& families,
                                      const std::vector<int>& hs, const TrainConfig& cfg,
                                      const std::filesystem::path& out, unsigned threads);

struct AlphaRow {
  std::string dataset;
  double alpha_layer1 = 0.0;
  double alpha_layer2 = 0.0;
};

/// Trains a Laguerre model on each dataset and writes alpha.csv.
std::vector<AlphaRow> cmd_report_alpha(const std::vector<std::string>& datasets, const TrainConfig& cfg,
                                       const std::filesystem::path& out, unsigned threads);

}  // namespace polyfilter
