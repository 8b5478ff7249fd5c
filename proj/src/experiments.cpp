#include "polyfilter/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "polyfilter/checkpoint.hpp"
#include "polyfilter/errors.hpp"

namespace fs = std::filesystem;

namespace polyfilter {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double mean_field(const std::vector<RunResult>& runs, std::size_t layer, double ShapeValues::*field) {
  double s = 0.0;
  for (const RunResult& r : runs) s += r.learned[layer].*field;
  return s / static_cast<double>(runs.size());
}

std::vector<AblationRow> ablate(const std::string& dataset, const std::vector<FamilyKind>& families,
                                const std::vector<int>& values, bool vary_k, const TrainConfig& cfg,
                                const fs::path& out, unsigned threads) {
  if (families.empty() || values.empty()) throw std::invalid_argument("ablation needs at least one family and value");
  for (int v : values)
    if (v < 1) throw std::invalid_argument((vary_k ? "K" : "H") + std::string(" values must be >= 1"));
  const DatasetBundle data = load_dataset(resolve_dataset(dataset));

  std::vector<AblationRow> rows;
  for (FamilyKind f : families)
    for (int v : values) rows.push_back({v, f, 0.0});

  // Parallelize over configurations; each configuration's folds then run serially.
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    TrainConfig c = cfg;
    c.family = rows[i].family;
    if (vary_k) {
      c.num_bases = rows[i].value;
    } else {
      c.hidden = static_cast<std::size_t>(rows[i].value);
    }
    rows[i].acc = run_experiment(data, c, 1).acc_mean;
  });

  std::string csv(vary_k ? kAblateKHeader : kAblateHHeader);
  csv += '\n';
  for (const AblationRow& r : rows) csv += std::to_string(r.value) + "," + std::string(to_string(r.family)) + "," + num(r.acc) + "\n";
  fs::create_directories(out);
  write_file_atomic(out / (vary_k ? "ablate_k.csv" : "ablate_h.csv"), csv);
  return rows;
}

}  // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

fs::path resolve_dataset(const std::string& arg) {
  if (fs::is_directory(arg)) return arg;
  std::vector<fs::path> candidates;
  if (const char* env = std::getenv("POLYFILTER_DATA_DIR"); env && *env) candidates.push_back(fs::path(env) / arg);
  candidates.push_back(fs::path("data") / arg);
  for (const fs::path& p : candidates)
    if (fs::is_directory(p)) return p;
  std::string tried = arg;
  for (const fs::path& p : candidates) tried += ", " + p.string();
  throw DataError("dataset '" + arg + "' not found (tried " + tried + ")");
}

unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("POLYFILTER_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

Outcome run_experiment(const DatasetBundle& data, const TrainConfig& config, unsigned threads) {
  TrainConfig cfg = config;
  if (cfg.epochs == kAutoEpochs) cfg.epochs = data.has_folds() ? 400 : 200;
  Outcome o;
  o.dataset = data.name;
  o.cfg = cfg;
  if (data.has_folds()) {
    TenFoldResult r = run_ten_fold(data, cfg, threads);
    o.acc_mean = r.mean;
    o.acc_std = r.std;
    o.runs = std::move(r.folds);
  } else {
    o.runs.push_back(train_single_split(data, cfg));
    o.acc_mean = o.runs.front().test_acc;
    o.acc_std = 0.0;
  }
  for (std::size_t layer = 0; layer < 2; ++layer) {
    o.learned[layer] = {mean_field(o.runs, layer, &ShapeValues::alpha), mean_field(o.runs, layer, &ShapeValues::beta),
                        mean_field(o.runs, layer, &ShapeValues::c), mean_field(o.runs, layer, &ShapeValues::p)};
  }
  return o;
}

std::string summary_row(const Outcome& o) {
  const auto& l = o.learned;
  std::ostringstream os;
  os << o.dataset << ',' << to_string(o.cfg.family) << ',' << o.cfg.num_bases << ',' << o.cfg.hidden << ','
     << o.cfg.seed << ',' << num(o.acc_mean) << ',' << num(o.acc_std) << ',' << num(l[0].alpha) << ','
     << num(l[1].alpha) << ',' << num(l[0].beta) << ',' << num(l[1].beta) << ',' << num(l[0].c) << ','
     << num(l[1].c) << ',' << num(l[0].p) << ',' << num(l[1].p);
  return os.str();
}

std::string epoch_log_csv(const RunResult& r) {
  std::string csv(kEpochLogHeader);
  csv += '\n';
  for (const EpochLog& e : r.log)
    csv += std::to_string(e.epoch) + "," + num(e.train_loss) + "," + num(e.val_acc) + "," + num(e.test_acc) + "\n";
  return csv;
}

void write_file_atomic(const fs::path& file, const std::string& content) {
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, file);
}

Outcome cmd_train(const std::string& dataset, const TrainConfig& cfg, const fs::path& out, unsigned threads) {
  const DatasetBundle data = load_dataset(resolve_dataset(dataset));
  Outcome o = run_experiment(data, cfg, threads);

  fs::create_directories(out);
  for (std::size_t i = 0; i < o.runs.size(); ++i) {
    const std::string suffix = data.has_folds() ? "_fold" + std::to_string(i) : "";
    RunResult& r = o.runs[i];
    write_file_atomic(out / ("log" + suffix + ".csv"), epoch_log_csv(r));
    write_file_atomic(out / ("model" + suffix + ".json"), checkpoint_to_json(r.model) + "\n");
    write_file_atomic(out / ("learned_params" + suffix + ".txt"), learned_params_text(r.model));
  }
  write_file_atomic(out / "summary.csv", std::string(kSummaryHeader) + "\n" + summary_row(o) + "\n");
  return o;
}

std::vector<AblationRow> cmd_ablate_k(const std::string& dataset, const std::vector<FamilyKind>& families,
                                      const std::vector<int>& ks, const TrainConfig& cfg, const fs::path& out,
                                      unsigned threads) {
  return ablate(dataset, families, ks, true, cfg, out, threads);
}

std::vector<AblationRow> cmd_ablate_h(const std::string& dataset, const std::vector<FamilyKind>& families,
                                      const std::vector<int>& hs, const TrainConfig& cfg, const fs::path& out,
                                      unsigned threads) {
  return ablate(dataset, families, hs, false, cfg, out, threads);
}

std::vector<AlphaRow> cmd_report_alpha(const std::vector<std::string>& datasets, const TrainConfig& cfg,
                                       const fs::path& out, unsigned threads) {
  if (datasets.empty()) throw std::invalid_argument("report-alpha needs at least one dataset");
  std::vector<DatasetBundle> bundles;
  for (const std::string& d : datasets) bundles.push_back(load_dataset(resolve_dataset(d)));

  std::vector<AlphaRow> rows(bundles.size());
  TrainConfig c = cfg;
  c.family = FamilyKind::Laguerre;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const Outcome o = run_experiment(bundles[i], c, threads);
    rows[i] = {bundles[i].name, o.learned[0].alpha, o.learned[1].alpha};
  }

  std::string csv(kAlphaHeader);
  csv += '\n';
  for (const AlphaRow& r : rows) csv += r.dataset + "," + num(r.alpha_layer1) + "," + num(r.alpha_layer2) + "\n";
  fs::create_directories(out);
  write_file_atomic(out / "alpha.csv", csv);
  return rows;
}

}  // namespace polyfilter
