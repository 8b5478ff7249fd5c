#pragma once

// Independent reference computations used to check the engine: explicit
// polynomial expansions, Gauss-Laguerre quadrature, a dense no-tape
// reimplementation of the convolution layer, and finite-difference gradients.
// Nothing here calls the sparse kernels, the tape or the recurrence code.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polyfilter/layers.hpp"
#include "polyfilter/matrix.hpp"
#include "polyfilter/sparse.hpp"

namespace polyfilter::oracle {

/// Degree-k monic generalized Laguerre polynomial, from its closed-form
/// coefficients (-1)^{k-i} C(k,i) prod_{j=i+1..k}(alpha+j) of x^i.
double monic_laguerre_reference(int k, double alpha, double x);

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Laguerre rule for the weight x^alpha e^{-x} on [0, inf).
Quadrature gauss_laguerre(int n, double alpha);

/// Dense 0.5·(I - D^-1/2 A D^-1/2) built directly from an edge list.
Matrix dense_scaled_laplacian(const EdgeList& edges);
/// Dense -D^-1/2 A D^-1/2 built directly from an edge list.
Matrix dense_chebyshev_operator(const EdgeList& edges);

/// Straight-line dense evaluation of conv_forward.
Matrix dense_conv_forward(const PolyConvLayer& layer, const EdgeList& edges, const Matrix& x);

/// Gradient of f at params by central differences, entry by entry.
std::vector<double> central_difference(const std::function<double()>& f, std::span<double> params, double step);

struct GroupCheck {
  std::string name;
  double rel_error = 0.0;  // ||analytic - fd||_inf / max(||fd||_inf, floor)
  double fd_norm = 0.0;
};

/// Finite-difference check of the masked NLL loss of model_forward with respect to
/// every parameter group of the model. Dropout uses a fixed seed so the loss is
/// a deterministic function of the parameters.
std::vector<GroupCheck> check_model_gradients(NodeClassifier& model, const EdgeList& edges, const Matrix& x,
                                              std::span<const int> labels, std::span<const std::uint8_t> mask,
                                              std::uint64_t dropout_seed, double step = 1e-5);

/// Erdős–Rényi style graph with each pair present with probability p.
EdgeList random_graph(std::size_t n, double p, std::uint64_t seed);
Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

}  // namespace polyfilter::oracle
