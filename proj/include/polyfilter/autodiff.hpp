#pragma once

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tape records every operation whose inputs require gradients, in append
// order. backward() walks the records once in reverse, accumulating (+=) into
// per-node gradient buffers, so a value consumed by several operations receives
// the sum of their contributions. Scalars are 1x1 matrices and live on the same
// tape as the matrices they scale.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <unordered_map>
#include <vector>

#include "polyfilter/matrix.hpp"
#include "polyfilter/sparse.hpp"

namespace polyfilter::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Tensor {
 public:
  Tensor() = default;

  bool defined() const { return tape_ != nullptr; }
  std::size_t node_id() const { return id_; }
  Tape& tape() const { return *tape_; }

  const Matrix& value() const;
  std::size_t rows() const { return value().rows; }
  std::size_t cols() const { return value().cols; }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }
  double item() const;
  bool requires_grad() const;

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients of the loss with respect to every leaf variable of a tape.
class GradientMap {
 public:
  /// Gradient for a variable; a zero matrix of matching shape if it did not
  /// influence the loss. Throws for constants and intermediate nodes.
  const Matrix& of(const Tensor& t) const;
  bool contains(const Tensor& t) const { return grads_.contains(t.node_id()); }

 private:
  friend class Tape;
  std::unordered_map<std::size_t, Matrix> grads_;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that receives a gradient.
  Tensor variable(Matrix value);
  /// Leaf that never receives a gradient.
  Tensor constant(Matrix value);
  Tensor scalar(double v, bool requires_grad = false);

  /// Runs the reverse sweep from a scalar loss. May be called once per tape.
  GradientMap backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }

  // -- op implementation interface ------------------------------------------

  /// Appends a node. The backward function is dropped when no input needs a gradient.
  Tensor record(Matrix value, std::initializer_list<Tensor> inputs, BackwardFn fn);
  Tensor record(Matrix value, std::span<const Tensor> inputs, BackwardFn fn);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Upstream gradient of a node during backward.
  const Matrix& grad(std::size_t id) const { return nodes_[id].grad; }
  /// Accumulation buffer of an input node, zero-initialized on first use.
  Matrix& grad_buffer(std::size_t id);
  /// Adds g to a node's gradient, taking ownership of g when none exists yet.
  void accumulate_grad(std::size_t id, Matrix&& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool is_leaf = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  Tensor push(Node node);

  std::deque<Node> nodes_;  // stable addresses for value()
  bool backward_done_ = false;
};

// -- matrix operations ---------------------------------------------------------

/// Dense product. dA = dC·Bᵀ, dB = Aᵀ·dC.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Constant sparse operator times a variable. dX = Mᵀ·dY. The operator must
/// outlive the tape's backward pass.
Tensor spmm_const(const CsrMatrix& m, const Tensor& x);

/// y - s1·x1 - s0·x0. x0/s0 may be undefined, in which case that term is absent.
Tensor scalar_affine_combine(const Tensor& x1, const Tensor& s1, const Tensor& x0, const Tensor& s0,
                             const Tensor& y);

/// scale·(M·x1) - s1·x1 - s0·x0 as a single node, one step of a three-term
/// recurrence. s1 may be undefined, and so may x0/s0 (together). Same
/// lifetime rule for M as spmm_const.
Tensor recurrence_step(const CsrMatrix& m, double scale, const Tensor& x1, const Tensor& s1, const Tensor& x0,
                       const Tensor& s0);

/// Per-row standardization with biased variance, followed by gamma ⊙ x̂ + beta.
Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

Tensor relu(const Tensor& x);

/// Inverted dropout: kept entries are scaled by 1/(1-p). Identity when not training or p == 0.
Tensor dropout(const Tensor& x, double p, std::uint64_t seed, bool training);

Tensor concat_cols(std::span<const Tensor> xs);

/// concat_cols(xs)·w without materializing the concatenation.
Tensor concat_matmul(std::span<const Tensor> xs, const Tensor& w);

/// x + bias broadcast over rows; bias is 1 x cols.
Tensor add_row_bias(const Tensor& x, const Tensor& bias);

Tensor log_softmax_rows(const Tensor& x);

/// Mean of -logp[i, labels[i]] over rows with mask[i] set. Throws on an empty mask.
Tensor nll_loss_masked(const Tensor& logp, std::span<const int> labels, std::span<const std::uint8_t> mask);

Tensor sum(const Tensor& x);

// -- scalar operations -----------------------------------------------------------

Tensor softplus_s(const Tensor& x);
Tensor sigmoid_s(const Tensor& x);
/// scale·x + shift for a scalar tensor and plain constants.
Tensor affine_s(const Tensor& x, double scale, double shift);
Tensor mul_s(const Tensor& a, const Tensor& b);
Tensor div_s(const Tensor& a, const Tensor& b);

}  // namespace polyfilter::ad
