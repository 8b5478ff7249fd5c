#include "polyfilter/layers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "polyfilter/errors.hpp"
#include "polyfilter/random.hpp"

namespace polyfilter {

namespace {

ParamRef ref_of(std::string name, Matrix& m) { return {std::move(name), m.data, m.rows, m.cols}; }

}  // namespace

PolyConvLayer PolyConvLayer::create(BasisFamily family, int num_bases, std::size_t f_in, std::size_t f_out,
                                    std::uint64_t seed) {
  if (num_bases < 1) throw std::invalid_argument("PolyConvLayer: K must be at least 1");
  if (f_in == 0 || f_out == 0) throw std::invalid_argument("PolyConvLayer: feature dimensions must be positive");
  PolyConvLayer l;
  l.family = std::move(family);
  l.num_bases = num_bases;
  l.f_in = f_in;
  l.f_out = f_out;
  const auto k = static_cast<std::size_t>(num_bases);
  l.ln_gamma.assign(k, Matrix(1, f_in, 1.0));
  l.ln_beta.assign(k, Matrix(1, f_in, 0.0));
  l.weight = Matrix(k * f_in, f_out);
  const double limit = std::sqrt(6.0 / static_cast<double>(k * f_in + f_out));
  Rng rng(seed);
  for (double& w : l.weight.data) w = rng.uniform(-limit, limit);
  l.bias = Matrix(1, f_out);
  return l;
}

std::vector<ParamRef> PolyConvLayer::parameters() {
  std::vector<ParamRef> out = shape_parameters(family);
  for (std::size_t k = 0; k < ln_gamma.size(); ++k) out.push_back(ref_of("ln_gamma" + std::to_string(k), ln_gamma[k]));
  for (std::size_t k = 0; k < ln_beta.size(); ++k) out.push_back(ref_of("ln_beta" + std::to_string(k), ln_beta[k]));
  out.push_back(ref_of("weight", weight));
  out.push_back(ref_of("bias", bias));
  return out;
}

ad::Tensor conv_forward(PolyConvLayer& layer, const GraphOperators& ops, const ad::Tensor& x,
                        ParameterBinding& binding, ConvTrace* trace) {
  if (x.cols() != layer.f_in) {
    throw ShapeError("conv_forward: input has " + std::to_string(x.cols()) + " features, layer expects " +
                     std::to_string(layer.f_in));
  }
  const BoundFamily fam = bind_family(layer.family, binding);
  const std::vector<ad::Tensor> bases = generate_bases(fam, ops.for_family(fam.kind), x, layer.num_bases);

  std::vector<ad::Tensor> normalized;
  normalized.reserve(bases.size());
  for (std::size_t k = 0; k < bases.size(); ++k) {
    if (layer.use_layernorm) {
      const ad::Tensor g = binding.bind(ref_of("ln_gamma" + std::to_string(k), layer.ln_gamma[k]));
      const ad::Tensor b = binding.bind(ref_of("ln_beta" + std::to_string(k), layer.ln_beta[k]));
      normalized.push_back(ad::layernorm(bases[k], g, b, kLayerNormEps));
    } else {
      normalized.push_back(bases[k]);
    }
    if (trace) {
      trace->raw_max_abs.push_back(max_abs(bases[k].value()));
      trace->normalized_max_abs.push_back(max_abs(normalized.back().value()));
    }
  }
  const ad::Tensor w = binding.bind(ref_of("weight", layer.weight));
  const ad::Tensor b = binding.bind(ref_of("bias", layer.bias));
  ad::Tensor out = ad::add_row_bias(ad::concat_matmul(normalized, w), b);
  if (trace) trace->output_max_abs = max_abs(out.value());
  return out;
}

NodeClassifier NodeClassifier::create(const ModelConfig& cfg, std::size_t n_features, std::size_t n_classes,
                                      std::uint64_t seed) {
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw std::invalid_argument("dropout must lie in [0, 1)");
  NodeClassifier m;
  const BasisFamily fam = initial_family(cfg.family, cfg.krawtchouk_n);
  m.layer1 = PolyConvLayer::create(fam, cfg.num_bases, n_features, cfg.hidden, derive_seed(seed, 1));
  m.layer2 = PolyConvLayer::create(fam, cfg.num_bases, cfg.hidden, n_classes, derive_seed(seed, 2));
  m.layer1.use_layernorm = m.layer2.use_layernorm = cfg.use_layernorm;
  m.dropout_p = cfg.dropout;
  return m;
}

std::vector<ParamRef> NodeClassifier::parameters() {
  std::vector<ParamRef> out;
  for (auto [prefix, layer] : {std::pair{"layer1.", &layer1}, std::pair{"layer2.", &layer2}}) {
    for (ParamRef r : layer->parameters()) {
      r.name = prefix + r.name;
      out.push_back(std::move(r));
    }
  }
  return out;
}

ad::Tensor model_forward(NodeClassifier& model, const GraphOperators& ops, const ad::Tensor& x,
                         ParameterBinding& binding, bool training, std::uint64_t seed, ForwardTrace* trace) {
  if (x.cols() != model.layer1.f_in) {
    throw ShapeError("model_forward: input has " + std::to_string(x.cols()) + " features, model expects " +
                     std::to_string(model.layer1.f_in));
  }
  const ad::Tensor h = ad::relu(conv_forward(model.layer1, ops, x, binding, trace ? &trace->layer1 : nullptr));
  const ad::Tensor d = ad::dropout(h, model.dropout_p, seed, training);
  const ad::Tensor out = conv_forward(model.layer2, ops, d, binding, trace ? &trace->layer2 : nullptr);
  return ad::log_softmax_rows(out);
}

Matrix predict_log_probs(const NodeClassifier& model, const GraphOperators& ops, const Matrix& x) {
  NodeClassifier copy = model;
  ad::Tape tape;
  ParameterBinding binding(tape, false);
  return model_forward(copy, ops, tape.constant(x), binding, false, 0).value();
}

}  // namespace polyfilter
