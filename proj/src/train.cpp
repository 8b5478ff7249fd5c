#include "polyfilter/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "polyfilter/errors.hpp"
#include "polyfilter/random.hpp"

namespace polyfilter {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (num_bases < 1) throw std::invalid_argument("K must be at least 1");
  if (hidden < 1) throw std::invalid_argument("hidden dimension must be at least 1");
  if (weight_decay < 0.0) throw std::invalid_argument("weight decay must be non-negative");
}

ModelConfig TrainConfig::model_config() const {
  return {family, num_bases, hidden, dropout, krawtchouk_n, use_layernorm};
}

void adam_step(AdamState& s, std::span<const ParamRef> params, std::span<const Matrix> grads, double lr,
               double weight_decay) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (s.m.empty()) {
    for (const ParamRef& p : params) {
      s.m.emplace_back(p.values.size(), 0.0);
      s.v.emplace_back(p.values.size(), 0.0);
    }
  }
  if (s.m.size() != params.size()) throw ShapeError("adam_step: parameter list changed between steps");
  ++s.step;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto w = params[i].values;
    const auto& g = grads[i].data;
    if (g.size() != w.size() || s.m[i].size() != w.size()) {
      throw ShapeError("adam_step: shape mismatch for " + params[i].name);
    }
    auto& m = s.m[i];
    auto& v = s.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g[j] + weight_decay * w[j];
      m[j] = s.beta1 * m[j] + (1.0 - s.beta1) * gj;
      v[j] = s.beta2 * v[j] + (1.0 - s.beta2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] -= lr * mhat / (std::sqrt(vhat) + s.eps);
    }
  }
}

double evaluate_accuracy(const Matrix& logp, std::span<const int> labels, std::span<const std::uint8_t> mask) {
  if (labels.size() != logp.rows || mask.size() != logp.rows) throw ShapeError("evaluate_accuracy: size mismatch");
  std::size_t total = 0, correct = 0;
  for (std::size_t r = 0; r < logp.rows; ++r) {
    if (!mask[r]) continue;
    ++total;
    const auto row = logp.row(r);
    // max_element returns the first maximum, i.e. the lowest class index on ties.
    const auto pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (pred == labels[r]) ++correct;
  }
  if (total == 0) throw std::invalid_argument("evaluate_accuracy: empty mask");
  return static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

bool any_set(const std::vector<std::uint8_t>& m) {
  return std::any_of(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; });
}

double trace_max(const ForwardTrace& t) {
  double m = std::max(t.layer1.output_max_abs, t.layer2.output_max_abs);
  for (const ConvTrace* c : {&t.layer1, &t.layer2})
    for (double v : c->normalized_max_abs) m = std::max(m, v);
  return m;
}

}  // namespace

RunResult train_split(const DatasetBundle& data, const SplitMasks& masks, const GraphOperators& ops,
                      const TrainConfig& cfg) {
  cfg.validate();
  if (!any_set(masks.train)) throw std::invalid_argument("train_split: empty train mask");
  const bool has_val = any_set(masks.val);
  const bool has_test = any_set(masks.test);

  RunResult result;
  result.model = NodeClassifier::create(cfg.model_config(), data.features.cols, data.n_classes, cfg.seed);
  NodeClassifier& model = result.model;
  const std::vector<ParamRef> params = model.parameters();
  AdamState adam;
  std::vector<Matrix> grads(params.size());

  result.log.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    {
      ad::Tape tape;
      ParameterBinding binding(tape);
      ForwardTrace trace;
      const ad::Tensor x = tape.constant(data.features);
      const ad::Tensor logp = model_forward(model, ops, x, binding, true,
                                            derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)), &trace);
      const ad::Tensor loss = ad::nll_loss_masked(logp, data.labels, masks.train);
      entry.train_loss = loss.item();
      entry.max_activation = trace_max(trace);
      if (!std::isfinite(entry.train_loss)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) +
                             " (max activation " + std::to_string(entry.max_activation) + ")");
      }
      const ad::GradientMap g = tape.backward(loss);
      for (std::size_t i = 0; i < params.size(); ++i) {
        grads[i] = Matrix(params[i].rows, params[i].cols);
        for (const BoundParameter& bp : binding.bound()) {
          if (bp.ref.values.data() == params[i].values.data()) {
            grads[i] = g.of(bp.tensor);
            break;
          }
        }
      }
    }
    adam_step(adam, params, grads, cfg.lr, cfg.weight_decay);

    const Matrix eval = predict_log_probs(model, ops, data.features);
    entry.val_acc = has_val ? evaluate_accuracy(eval, data.labels, masks.val) : std::numeric_limits<double>::quiet_NaN();
    entry.test_acc = has_test ? evaluate_accuracy(eval, data.labels, masks.test) : std::numeric_limits<double>::quiet_NaN();
    if (has_val && (epoch == 1 || entry.val_acc > result.best_val_acc)) {
      result.best_val_acc = entry.val_acc;
      result.best_val_test_acc = entry.test_acc;
      result.best_val_epoch = epoch;
    }
    result.log.push_back(entry);
  }
  result.test_acc = result.log.back().test_acc;
  result.learned = {effective_values(model.layer1.family), effective_values(model.layer2.family)};
  return result;
}

RunResult train_single_split(const DatasetBundle& data, const TrainConfig& cfg) {
  const auto* single = std::get_if<SingleSplit>(&data.split);
  if (!single) throw std::invalid_argument("train_single_split: dataset '" + data.name + "' defines folds");
  const GraphOperators ops = GraphOperators::from_adjacency(symmetrize_dedup(data.edges));
  return train_split(data, single->masks, ops, cfg);
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TenFoldResult run_ten_fold(const DatasetBundle& data, const TrainConfig& cfg, unsigned threads) {
  const auto* folds = std::get_if<Folds>(&data.split);
  if (!folds || folds->folds.size() != kNumFolds) {
    throw std::invalid_argument("run_ten_fold: dataset '" + data.name + "' does not define " +
                                std::to_string(kNumFolds) + " folds");
  }
  cfg.validate();
  const GraphOperators ops = GraphOperators::from_adjacency(symmetrize_dedup(data.edges));

  TenFoldResult out;
  out.folds.resize(kNumFolds);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < kNumFolds;) {
      try {
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = cfg.seed + i;
        out.folds[i] = train_split(data, folds->folds[i], ops, fold_cfg);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::clamp<unsigned>(threads, 1, kNumFolds);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<double> accs;
  for (const RunResult& r : out.folds) accs.push_back(r.test_acc);
  out.mean = mean_of(accs);
  out.std = sample_std(accs);
  return out;
}

}  // namespace polyfilter
