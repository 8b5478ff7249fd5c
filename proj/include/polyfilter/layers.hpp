#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "polyfilter/autodiff.hpp"
#include "polyfilter/parameters.hpp"
#include "polyfilter/poly_basis.hpp"

namespace polyfilter {

inline constexpr double kLayerNormEps = 1e-5;

/// Polynomial graph convolution: K bases, LayerNorm on each, concatenation,
/// then a linear projection.
struct PolyConvLayer {
  BasisFamily family;
  int num_bases = 3;
  std::size_t f_in = 0;
  std::size_t f_out = 0;
  std::vector<Matrix> ln_gamma;  // K entries, each 1 x f_in
  std::vector<Matrix> ln_beta;   // K entries, each 1 x f_in
  Matrix weight;                 // (K * f_in) x f_out
  Matrix bias;                   // 1 x f_out
  /// Off only for stability experiments; bases then enter the projection raw.
  bool use_layernorm = true;

  /// Glorot-uniform weights, zero bias, unit gamma, zero beta.
  static PolyConvLayer create(BasisFamily family, int num_bases, std::size_t f_in, std::size_t f_out,
                              std::uint64_t seed);

  /// Shape parameters first, then ln_gamma{k}, ln_beta{k}, weight, bias.
  std::vector<ParamRef> parameters();
};

/// Largest absolute entry of each basis before and after normalization.
struct ConvTrace {
  std::vector<double> raw_max_abs;
  std::vector<double> normalized_max_abs;
  double output_max_abs = 0.0;
};

ad::Tensor conv_forward(PolyConvLayer& layer, const GraphOperators& ops, const ad::Tensor& x,
                        ParameterBinding& binding, ConvTrace* trace = nullptr);

struct ModelConfig {
  FamilyKind family = FamilyKind::Laguerre;
  int num_bases = 3;
  std::size_t hidden = 16;
  double dropout = 0.5;
  int krawtchouk_n = kDefaultKrawtchoukN;
  bool use_layernorm = true;
};

/// Two PolyConv layers with ReLU and dropout in between and a log-softmax head.
struct NodeClassifier {
  PolyConvLayer layer1;
  PolyConvLayer layer2;
  double dropout_p = 0.5;

  static NodeClassifier create(const ModelConfig& cfg, std::size_t n_features, std::size_t n_classes,
                               std::uint64_t seed);

  /// Parameters named "layer{1,2}.{param}".
  std::vector<ParamRef> parameters();
};

struct ForwardTrace {
  ConvTrace layer1;
  ConvTrace layer2;
};

/// Log-probabilities, n x n_classes.
ad::Tensor model_forward(NodeClassifier& model, const GraphOperators& ops, const ad::Tensor& x,
                         ParameterBinding& binding, bool training, std::uint64_t seed,
                         ForwardTrace* trace = nullptr);

/// Evaluation-mode log-probabilities without recording gradients.
Matrix predict_log_probs(const NodeClassifier& model, const GraphOperators& ops, const Matrix& x);

}  // namespace polyfilter
