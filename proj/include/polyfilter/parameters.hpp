#pragma once

#include <span>
#include <string>
#include <vector>

#include "polyfilter/autodiff.hpp"
#include "polyfilter/matrix.hpp"

namespace polyfilter {

/// Named view onto parameter storage owned by a model.
struct ParamRef {
  std::string name;
  std::span<double> values;
  std::size_t rows = 1;
  std::size_t cols = 1;

  Matrix to_matrix() const { return Matrix(rows, cols, std::vector<double>(values.begin(), values.end())); }
};

struct BoundParameter {
  ParamRef ref;
  ad::Tensor tensor;
};

/// Places parameters on a tape and remembers which tensor stands for which
/// parameter, so gradients can be routed back after backward().
class ParameterBinding {
 public:
  explicit ParameterBinding(ad::Tape& tape, bool trainable = true) : tape_(tape), trainable_(trainable) {}

  ad::Tensor bind(const ParamRef& ref) {
    ad::Tensor t = trainable_ ? tape_.variable(ref.to_matrix()) : tape_.constant(ref.to_matrix());
    bound_.push_back({ref, t});
    return t;
  }

  ad::Tape& tape() { return tape_; }
  const std::vector<BoundParameter>& bound() const { return bound_; }

 private:
  ad::Tape& tape_;
  bool trainable_;
  std::vector<BoundParameter> bound_;
};

}  // namespace polyfilter
