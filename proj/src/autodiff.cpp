#include "polyfilter/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "polyfilter/errors.hpp"
#include "polyfilter/random.hpp"

namespace polyfilter::ad {

const Matrix& Tensor::value() const {
  if (!tape_) throw std::logic_error("undefined tensor");
  return tape_->value(id_);
}

double Tensor::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("item() on non-scalar tensor " + v.shape_str());
  return v.data[0];
}

bool Tensor::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

const Matrix& GradientMap::of(const Tensor& t) const {
  const auto it = grads_.find(t.node_id());
  if (it == grads_.end()) throw std::out_of_range("no gradient recorded for node " + std::to_string(t.node_id()));
  return it->second;
}

Tensor Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::variable(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.is_leaf = true;
  return push(std::move(n));
}

Tensor Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.is_leaf = true;
  return push(std::move(n));
}

Tensor Tape::scalar(double v, bool requires_grad) {
  return requires_grad ? variable(Matrix::scalar(v)) : constant(Matrix::scalar(v));
}

Tensor Tape::record(Matrix value, std::initializer_list<Tensor> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Tensor>(inputs.begin(), inputs.size()), std::move(fn));
}

Tensor Tape::record(Matrix value, std::span<const Tensor> inputs, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (const Tensor& t : inputs) {
    if (!t.defined()) continue;
    if (&t.tape() != this) throw std::logic_error("tensor from a different tape");
    n.requires_grad = n.requires_grad || nodes_[t.node_id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

Matrix& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Matrix(n.value.rows, n.value.cols);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::accumulate_grad(std::size_t id, Matrix&& g) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    if (!g.same_shape(n.value)) throw ShapeError("gradient " + g.shape_str() + " for value " + n.value.shape_str());
    n.grad = std::move(g);
    n.has_grad = true;
  } else {
    axpy(n.grad, 1.0, g);
  }
}

GradientMap Tape::backward(const Tensor& loss) {
  if (backward_done_) throw std::logic_error("backward already ran on this tape");
  if (&loss.tape() != this) throw std::logic_error("loss belongs to a different tape");
  if (!loss.is_scalar()) throw ShapeError("backward requires a scalar loss, got " + loss.value().shape_str());
  backward_done_ = true;

  if (nodes_[loss.node_id()].requires_grad) grad_buffer(loss.node_id()).data[0] = 1.0;
  for (std::size_t i = loss.node_id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, i);
    // Interior gradients are dead once propagated.
    n.grad = Matrix();
    n.has_grad = false;
  }

  GradientMap out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    if (!n.is_leaf || !n.requires_grad) continue;
    out.grads_.emplace(i, n.has_grad ? std::move(n.grad) : Matrix(n.value.rows, n.value.cols));
  }
  return out;
}

namespace {

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError(std::string(op) + ": " + a.shape_str() + " vs " + b.shape_str());
}

void require_scalar(const char* op, const Tensor& t) {
  if (!t.is_scalar()) throw ShapeError(std::string(op) + ": expected scalar, got " + t.value().shape_str());
}

Tape& common_tape(const Tensor& a, const Tensor& b) {
  if (&a.tape() != &b.tape()) throw std::logic_error("operands on different tapes");
  return a.tape();
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape& tape = common_tape(a, b);
  Matrix out = polyfilter::matmul(a.value(), b.value());
  const std::size_t ia = a.node_id(), ib = b.node_id();
  return tape.record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate_grad(ia, matmul_nt(g, t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate_grad(ib, matmul_tn(t.value(ia), g));
  });
}

Tensor spmm_const(const CsrMatrix& m, const Tensor& x) {
  Tape& tape = x.tape();
  Matrix out = spmm(m, x.value());
  const std::size_t ix = x.node_id();
  const CsrMatrix* op = &m;
  return tape.record(std::move(out), {x}, [ix, op](Tape& t, std::size_t self) {
    t.accumulate_grad(ix, spmm_transposed(*op, t.grad(self)));
  });
}

Tensor scalar_affine_combine(const Tensor& x1, const Tensor& s1, const Tensor& x0, const Tensor& s0,
                             const Tensor& y) {
  require_scalar("scalar_affine_combine", s1);
  require_same_shape("scalar_affine_combine", x1.value(), y.value());
  const bool has_x0 = x0.defined();
  if (has_x0 != s0.defined()) throw std::invalid_argument("scalar_affine_combine: x0 and s0 must be given together");
  if (has_x0) {
    require_scalar("scalar_affine_combine", s0);
    require_same_shape("scalar_affine_combine", x0.value(), y.value());
  }
  Tape& tape = common_tape(x1, y);
  const double a1 = s1.item();
  const double a0 = has_x0 ? s0.item() : 0.0;
  Matrix out = y.value();
  const Matrix& v1 = x1.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= a1 * v1.data[i];
  if (has_x0) {
    const Matrix& v0 = x0.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= a0 * v0.data[i];
  }
  const std::size_t ix1 = x1.node_id(), is1 = s1.node_id(), iy = y.node_id();
  const std::size_t ix0 = has_x0 ? x0.node_id() : 0, is0 = has_x0 ? s0.node_id() : 0;
  return tape.record(std::move(out), {x1, s1, x0, s0, y}, [=](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(iy)) axpy(t.grad_buffer(iy), 1.0, g);
    if (t.requires_grad(ix1)) axpy(t.grad_buffer(ix1), -t.value(is1).data[0], g);
    if (t.requires_grad(is1)) t.grad_buffer(is1).data[0] -= frobenius_dot(g, t.value(ix1));
    if (!has_x0) return;
    if (t.requires_grad(ix0)) axpy(t.grad_buffer(ix0), -t.value(is0).data[0], g);
    if (t.requires_grad(is0)) t.grad_buffer(is0).data[0] -= frobenius_dot(g, t.value(ix0));
  });
}

Tensor recurrence_step(const CsrMatrix& m, double scale, const Tensor& x1, const Tensor& s1, const Tensor& x0,
                       const Tensor& s0) {
  const bool has_s1 = s1.defined();
  const bool has_x0 = x0.defined();
  if (has_x0 != s0.defined()) throw std::invalid_argument("recurrence_step: x0 and s0 must be given together");
  if (has_s1) require_scalar("recurrence_step", s1);
  if (has_x0) {
    require_scalar("recurrence_step", s0);
    require_same_shape("recurrence_step", x0.value(), x1.value());
  }
  Tape& tape = x1.tape();
  const Matrix& v1 = x1.value();
  Matrix out = spmm(m, v1);
  if (!out.same_shape(v1)) throw ShapeError("recurrence_step: operator must be square, got " + out.shape_str());
  if (scale != 1.0)
    for (double& v : out.data) v *= scale;
  if (has_s1) {
    const double a1 = s1.item();
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= a1 * v1.data[i];
  }
  if (has_x0) {
    const double a0 = s0.item();
    const Matrix& v0 = x0.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= a0 * v0.data[i];
  }
  const std::size_t ix1 = x1.node_id();
  const std::size_t is1 = has_s1 ? s1.node_id() : 0;
  const std::size_t ix0 = has_x0 ? x0.node_id() : 0, is0 = has_x0 ? s0.node_id() : 0;
  const CsrMatrix* op = &m;
  return tape.record(std::move(out), {x1, s1, x0, s0}, [=](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (has_s1 && t.requires_grad(is1)) t.grad_buffer(is1).data[0] -= frobenius_dot(g, t.value(ix1));
    if (has_x0) {
      if (t.requires_grad(is0)) t.grad_buffer(is0).data[0] -= frobenius_dot(g, t.value(ix0));
      if (t.requires_grad(ix0)) axpy(t.grad_buffer(ix0), -t.value(is0).data[0], g);
    }
    if (!t.requires_grad(ix1)) return;
    Matrix d = spmm_transposed(*op, g);
    if (scale != 1.0)
      for (double& v : d.data) v *= scale;
    if (has_s1) axpy(d, -t.value(is1).data[0], g);
    t.accumulate_grad(ix1, std::move(d));
  });
}

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const Matrix& xv = x.value();
  const std::size_t n = xv.rows, f = xv.cols;
  if (gamma.rows() != 1 || gamma.cols() != f || beta.rows() != 1 || beta.cols() != f) {
    throw ShapeError("layernorm: gamma/beta must be 1x" + std::to_string(f) + ", got " +
                     gamma.value().shape_str() + " and " + beta.value().shape_str());
  }
  Tape& tape = common_tape(x, gamma);
  const Matrix& gv = gamma.value();
  const Matrix& bv = beta.value();

  // Only the row statistics are kept; backward recomputes x̂ from the input,
  // which the tape holds anyway.
  auto mean_of = std::make_shared<std::vector<double>>(n);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  Matrix out(n, f);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = xv.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(f);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(f);
    const double is = 1.0 / std::sqrt(var + eps);
    (*mean_of)[r] = mean;
    (*inv_std)[r] = is;
    for (std::size_t j = 0; j < f; ++j) out(r, j) = gv.data[j] * ((row[j] - mean) * is) + bv.data[j];
  }
  const std::size_t ix = x.node_id(), ig = gamma.node_id(), ib = beta.node_id();
  return tape.record(std::move(out), {x, gamma, beta}, [=](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& in = t.value(ix);
    const Matrix& gam = t.value(ig);
    Matrix* dg = t.requires_grad(ig) ? &t.grad_buffer(ig) : nullptr;
    Matrix* db = t.requires_grad(ib) ? &t.grad_buffer(ib) : nullptr;
    Matrix* dx = t.requires_grad(ix) ? &t.grad_buffer(ix) : nullptr;
    const double inv_f = 1.0 / static_cast<double>(f);
    std::vector<double> h(f);
    for (std::size_t r = 0; r < n; ++r) {
      const double mean = (*mean_of)[r], is = (*inv_std)[r];
      const double* xr = in.data.data() + r * f;
      const double* gr = g.data.data() + r * f;
      for (std::size_t j = 0; j < f; ++j) h[j] = (xr[j] - mean) * is;
      if (dg)
        for (std::size_t j = 0; j < f; ++j) dg->data[j] += gr[j] * h[j];
      if (db)
        for (std::size_t j = 0; j < f; ++j) db->data[j] += gr[j];
      if (!dx) continue;
      double mean_d = 0.0, mean_dh = 0.0;
      for (std::size_t j = 0; j < f; ++j) {
        const double d = gr[j] * gam.data[j];
        mean_d += d;
        mean_dh += d * h[j];
      }
      mean_d *= inv_f;
      mean_dh *= inv_f;
      double* dxr = dx->data.data() + r * f;
      for (std::size_t j = 0; j < f; ++j) dxr[j] += is * (gr[j] * gam.data[j] - mean_d - h[j] * mean_dh);
    }
  });
}

Tensor relu(const Tensor& x) {
  Matrix out = x.value();
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.node_id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& in = t.value(ix);
    Matrix& dx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in.data[i] > 0.0) dx.data[i] += g.data[i];
  });
}


Tensor dropout(const Tensor& x, double p, std::uint64_t seed, bool training) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  Rng rng(seed);
  auto mask = std::make_shared<std::vector<double>>(x.value().size());
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() >= p ? keep_scale : 0.0;
    out.data[i] *= (*mask)[i];
  }
  const std::size_t ix = x.node_id();
  return x.tape().record(std::move(out), {x}, [ix, mask](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    Matrix& dx = t.grad_buffer(ix);
    for (std::size_t i = 0; i < g.size(); ++i) dx.data[i] += g.data[i] * (*mask)[i];
  });
}

Tensor concat_cols(std::span<const Tensor> xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t n = xs.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, offsets, widths;
  for (const Tensor& x : xs) {
    if (x.rows() != n) throw ShapeError("concat_cols: row mismatch " + x.value().shape_str());
    if (&x.tape() != &xs.front().tape()) throw std::logic_error("concat_cols: tensors on different tapes");
    ids.push_back(x.node_id());
    offsets.push_back(total);
    widths.push_back(x.cols());
    total += x.cols();
  }
  Matrix out(n, total);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Matrix& v = xs[k].value();
    for (std::size_t r = 0; r < n; ++r) std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + offsets[k]);
  }
  return xs.front().tape().record(std::move(out), xs, [=](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.requires_grad(ids[k])) continue;
      Matrix& dx = t.grad_buffer(ids[k]);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < widths[k]; ++j) dx(r, j) += g(r, offsets[k] + j);
    }
  });
}

Tensor concat_matmul(std::span<const Tensor> xs, const Tensor& w) {
  if (xs.empty()) throw std::invalid_argument("concat_matmul: no inputs");
  const std::size_t n = xs.front().rows();
  Tape& tape = w.tape();
  std::vector<std::size_t> ids, offsets, widths;
  std::size_t total = 0;
  for (const Tensor& x : xs) {
    if (x.rows() != n) throw ShapeError("concat_matmul: row mismatch " + x.value().shape_str());
    if (&x.tape() != &tape) throw std::logic_error("concat_matmul: tensors on different tapes");
    ids.push_back(x.node_id());
    offsets.push_back(total);
    widths.push_back(x.cols());
    total += x.cols();
  }
  if (total != w.rows()) {
    throw ShapeError("concat_matmul: " + std::to_string(total) + " concatenated columns x " + w.value().shape_str());
  }
  Matrix out(n, w.cols());
  for (std::size_t k = 0; k < xs.size(); ++k) matmul_rows_acc(xs[k].value(), w.value(), offsets[k], out);

  std::vector<Tensor> inputs(xs.begin(), xs.end());
  inputs.push_back(w);
  const std::size_t iw = w.node_id();
  return tape.record(std::move(out), inputs, [=](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& wv = t.value(iw);
    Matrix* dw = t.requires_grad(iw) ? &t.grad_buffer(iw) : nullptr;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (dw) matmul_tn_rows_acc(t.value(ids[k]), g, *dw, offsets[k]);
      if (t.requires_grad(ids[k])) t.accumulate_grad(ids[k], matmul_nt_rows(g, wv, offsets[k], widths[k]));
    }
  });
}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t f = x.cols();
  if (bias.rows() != 1 || bias.cols() != f) {
    throw ShapeError("add_row_bias: bias " + bias.value().shape_str() + " for input " + x.value().shape_str());
  }
  Tape& tape = common_tape(x, bias);
  Matrix out = x.value();
  const Matrix& b = bias.value();
  for (std::size_t r = 0; r < out.rows; ++r)
    for (std::size_t j = 0; j < f; ++j) out(r, j) += b.data[j];
  const std::size_t ix = x.node_id(), ib = bias.node_id();
  return tape.record(std::move(out), {x, bias}, [ix, ib, f](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ix)) axpy(t.grad_buffer(ix), 1.0, g);
    if (t.requires_grad(ib)) {
      Matrix& db = t.grad_buffer(ib);
      for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t j = 0; j < f; ++j) db.data[j] += g(r, j);
    }
  });
}

Tensor log_softmax_rows(const Tensor& x) {
  Matrix out = x.value();
  for (std::size_t r = 0; r < out.rows; ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (double& v : row) v -= lse;
  }
  const std::size_t ix = x.node_id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, std::size_t self) {
    const Matrix& g = t.grad(self);
    const Matrix& logp = t.value(self);
    Matrix& dx = t.grad_buffer(ix);
    for (std::size_t r = 0; r < g.rows; ++r) {
      double gs = 0.0;
      for (std::size_t j = 0; j < g.cols; ++j) gs += g(r, j);
      for (std::size_t j = 0; j < g.cols; ++j) dx(r, j) += g(r, j) - std::exp(logp(r, j)) * gs;
    }
  });
}

Tensor nll_loss_masked(const Tensor& logp, std::span<const int> labels, std::span<const std::uint8_t> mask) {
  const Matrix& lp = logp.value();
  if (labels.size() != lp.rows || mask.size() != lp.rows) {
    throw ShapeError("nll_loss_masked: " + std::to_string(labels.size()) + " labels and " +
                     std::to_string(mask.size()) + " mask entries for " + lp.shape_str());
  }
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t i = 0; i < lp.rows; ++i) {
    if (!mask[i]) continue;
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= lp.cols)
      throw std::out_of_range("nll_loss_masked: label " + std::to_string(labels[i]) + " at row " + std::to_string(i));
    picks.emplace_back(i, static_cast<std::size_t>(labels[i]));
  }
  if (picks.empty()) throw std::invalid_argument("nll_loss_masked: empty mask");
  double s = 0.0;
  for (const auto& [r, c] : picks) s -= lp(r, c);
  const double inv = 1.0 / static_cast<double>(picks.size());
  const std::size_t ix = logp.node_id();
  return logp.tape().record(Matrix::scalar(s * inv), {logp},
                            [ix, inv, picks = std::move(picks)](Tape& t, std::size_t self) {
                              const double g = t.grad(self).data[0];
                              Matrix& dx = t.grad_buffer(ix);
                              for (const auto& [r, c] : picks) dx(r, c) -= g * inv;
                            });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.value().data) s += v;
  const std::size_t ix = x.node_id();
  return x.tape().record(Matrix::scalar(s), {x}, [ix](Tape& t, std::size_t self) {
    const double g = t.grad(self).data[0];
    for (double& v : t.grad_buffer(ix).data) v += g;
  });
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor softplus_s(const Tensor& x) {
  require_scalar("softplus_s", x);
  const double v = x.item();
  const std::size_t ix = x.node_id();
  return x.tape().record(Matrix::scalar(softplus(v)), {x}, [ix, v](Tape& t, std::size_t self) {
    t.grad_buffer(ix).data[0] += t.grad(self).data[0] * sigmoid(v);
  });
}

Tensor sigmoid_s(const Tensor& x) {
  require_scalar("sigmoid_s", x);
  const double s = sigmoid(x.item());
  const std::size_t ix = x.node_id();
  return x.tape().record(Matrix::scalar(s), {x}, [ix, s](Tape& t, std::size_t self) {
    t.grad_buffer(ix).data[0] += t.grad(self).data[0] * s * (1.0 - s);
  });
}

Tensor affine_s(const Tensor& x, double scale, double shift) {
  require_scalar("affine_s", x);
  const std::size_t ix = x.node_id();
  return x.tape().record(Matrix::scalar(scale * x.item() + shift), {x}, [ix, scale](Tape& t, std::size_t self) {
    t.grad_buffer(ix).data[0] += t.grad(self).data[0] * scale;
  });
}

Tensor mul_s(const Tensor& a, const Tensor& b) {
  require_scalar("mul_s", a);
  require_scalar("mul_s", b);
  Tape& tape = common_tape(a, b);
  const double av = a.item(), bv = b.item();
  const std::size_t ia = a.node_id(), ib = b.node_id();
  return tape.record(Matrix::scalar(av * bv), {a, b}, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self).data[0];
    if (t.requires_grad(ia)) t.grad_buffer(ia).data[0] += g * bv;
    if (t.requires_grad(ib)) t.grad_buffer(ib).data[0] += g * av;
  });
}

Tensor div_s(const Tensor& a, const Tensor& b) {
  require_scalar("div_s", a);
  require_scalar("div_s", b);
  Tape& tape = common_tape(a, b);
  const double av = a.item(), bv = b.item();
  const std::size_t ia = a.node_id(), ib = b.node_id();
  return tape.record(Matrix::scalar(av / bv), {a, b}, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self).data[0];
    if (t.requires_grad(ia)) t.grad_buffer(ia).data[0] += g / bv;
    if (t.requires_grad(ib)) t.grad_buffer(ib).data[0] -= g * av / (bv * bv);
  });
}

}  // namespace polyfilter::ad
