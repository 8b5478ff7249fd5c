#include <cmath>
#include <stdexcept>
#include <functional>
#include <numbers>

#include "doctest.h"

#include "polyfilter/autodiff.hpp"
#include "polyfilter/oracles.hpp"
#include "polyfilter/sparse.hpp"

using namespace polyfilter;
using ad::Tape;
using ad::Tensor;

namespace {

using Builder = std::function<Tensor(const std::vector<Tensor>&)>;

// Projects an op's output to a scalar with fixed random vectors, u^T out v,
// so every output entry carries a distinct weight.
Tensor project(const Tensor& out, std::uint64_t seed) {
  Tape& t = out.tape();
  const Tensor u = t.constant(oracle::random_matrix(1, out.rows(), seed));
  const Tensor v = t.constant(oracle::random_matrix(out.cols(), 1, seed + 1));
  return ad::matmul(ad::matmul(u, out), v);
}

// Worst relative error (inf-norm) between tape and central-difference
// gradients over all inputs of `build`.
double gradient_error(const Builder& build, std::vector<Matrix> inputs, std::uint64_t seed) {
  Tape tape;
  std::vector<Tensor> vars;
  for (const Matrix& m : inputs) vars.push_back(tape.variable(m));
  const ad::GradientMap g = tape.backward(project(build(vars), seed));

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto f = [&] {
      Tape t;
      std::vector<Tensor> cs;
      for (const Matrix& m : inputs) cs.push_back(t.constant(m));
      return project(build(cs), seed).item();
    };
    const std::vector<double> fd = oracle::central_difference(f, inputs[i].data, 1e-5);
    const Matrix& analytic = g.of(vars[i]);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < fd.size(); ++j) {
      diff = std::max(diff, std::abs(analytic.data[j] - fd[j]));
      norm = std::max(norm, std::abs(fd[j]));
    }
    worst = std::max(worst, diff / std::max(norm, 1e-7));
  }
  return worst;
}

Matrix rnd(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return oracle::random_matrix(r, c, seed, lo, hi);
}

}  // namespace

TEST_CASE("matmul values and gradients") {
  Tape t;
  const Tensor a = t.variable(Matrix::from_rows({{1, 2}}));
  const Tensor b = t.variable(Matrix::from_rows({{3}, {4}}));
  const Tensor c = ad::matmul(a, b);
  CHECK(c.value() == Matrix::from_rows({{11}}));
  const ad::GradientMap g = t.backward(ad::sum(c));
  CHECK(max_abs_diff(g.of(a), Matrix::from_rows({{3, 4}})) <= 1e-12);
  CHECK(max_abs_diff(g.of(b), Matrix::from_rows({{1}, {2}})) <= 1e-12);

  Tape t2;
  const Matrix bm = rnd(2, 3, 1);
  const Tensor i2 = t2.constant(Matrix::identity(2));
  const Tensor bv = t2.variable(bm);
  const Tensor prod = ad::matmul(i2, bv);
  CHECK(prod.value() == bm);
  // With loss = sum(C), dC is all ones and must pass straight through to dB.
  const ad::GradientMap g2 = t2.backward(ad::sum(prod));
  CHECK(g2.of(bv) == Matrix(2, 3, 1.0));
}

TEST_CASE("matmul rejects mismatched shapes") {
  Tape t;
  CHECK_THROWS_AS(ad::matmul(t.constant(Matrix(2, 3)), t.constant(Matrix(2, 3))), std::invalid_argument);
}

TEST_CASE("scalar_affine_combine values") {
  Tape t;
  const Tensor y = t.constant(rnd(2, 2, 3));
  const Tensor ones = t.constant(Matrix(2, 2, 1.0));
  const Tensor out = ad::scalar_affine_combine(ones, t.scalar(0.0), ones, t.scalar(0.0), y);
  CHECK(out.value() == y.value());

  const Tensor filled =
      ad::scalar_affine_combine(ones, t.scalar(2.0), ones, t.scalar(3.0), t.constant(Matrix(2, 2, 0.0)));
  CHECK(filled.value() == Matrix(2, 2, -5.0));

  const Tensor no_prev = ad::scalar_affine_combine(ones, t.scalar(2.0), Tensor(), Tensor(), y);
  for (std::size_t i = 0; i < 4; ++i) CHECK(no_prev.value().data[i] == y.value().data[i] - 2.0);
}

TEST_CASE("scalar_affine_combine gradient wrt the scalar") {
  Tape t;
  const Tensor s1 = t.scalar(0.7, true);
  const Tensor ones = t.constant(Matrix(2, 2, 1.0));
  const ad::GradientMap g =
      t.backward(ad::sum(ad::scalar_affine_combine(ones, s1, Tensor(), Tensor(), t.constant(Matrix(2, 2)))));
  CHECK(g.of(s1)(0, 0) == doctest::Approx(-4.0).epsilon(1e-14));
}

TEST_CASE("layernorm examples") {
  Tape t;
  const Tensor gamma = t.constant(Matrix(1, 3, 1.0));
  const Tensor beta = t.constant(Matrix(1, 3, 0.0));
  const Tensor flat = ad::layernorm(t.constant(Matrix::from_rows({{1, 1, 1}})), gamma, beta);
  CHECK(max_abs(flat.value()) == 0.0);

  const Tensor sym = ad::layernorm(t.constant(Matrix::from_rows({{0, 2}})), t.constant(Matrix(1, 2, 1.0)),
                                   t.constant(Matrix(1, 2, 0.0)), 1e-14);
  CHECK(sym.value()(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(sym.value()(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("layernorm gradient on a random 4x5 input") {
  const double err = gradient_error(
      [](const std::vector<Tensor>& v) { return ad::layernorm(v[0], v[1], v[2]); },
      {rnd(4, 5, 10), rnd(1, 5, 11, 0.5, 1.5), rnd(1, 5, 12)}, 13);
  CHECK(err <= 1e-6);
}

TEST_CASE("scalar functions and log-softmax examples") {
  Tape t;
  CHECK(ad::softplus_s(t.scalar(0.0)).item() == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(ad::sigmoid_s(t.scalar(0.0)).item() == 0.5);
  CHECK(ad::softplus_s(t.scalar(800.0)).item() == 800.0);
  CHECK(ad::softplus_s(t.scalar(-800.0)).item() >= 0.0);
  const Tensor lsm = ad::log_softmax_rows(t.constant(Matrix::from_rows({{0, 0}})));
  CHECK(lsm.value()(0, 0) == doctest::Approx(-std::numbers::ln2).epsilon(1e-15));
  CHECK(lsm.value()(0, 1) == doctest::Approx(-std::numbers::ln2).epsilon(1e-15));
}

TEST_CASE("nll over log-softmax on a single 3-class row") {
  const int label[] = {2};
  const std::uint8_t mask[] = {1};
  const double err = gradient_error(
      [&](const std::vector<Tensor>& v) { return ad::nll_loss_masked(ad::log_softmax_rows(v[0]), label, mask); },
      {rnd(1, 3, 20, -2, 2)}, 21);
  CHECK(err <= 1e-6);
}

TEST_CASE("nll_loss_masked rejects an empty mask") {
  Tape t;
  const int labels[] = {0, 1};
  const std::uint8_t mask[] = {0, 0};
  CHECK_THROWS(ad::nll_loss_masked(t.constant(Matrix(2, 2)), labels, mask));
}

TEST_CASE("every op passes a finite-difference gradient check") {
  const CsrMatrix op = laplacian_scaled(symmetrize_dedup(oracle::random_graph(6, 0.5, 77)));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::uint64_t b = 1000 * (s + 1);
    CAPTURE(s);
    const std::vector<std::pair<const char*, std::pair<Builder, std::vector<Matrix>>>> cases = {
        {"matmul", {[](auto& v) { return ad::matmul(v[0], v[1]); }, {rnd(3, 4, b), rnd(4, 2, b + 1)}}},
        {"spmm_const", {[&](auto& v) { return ad::spmm_const(op, v[0]); }, {rnd(6, 3, b + 2)}}},
        {"scalar_affine_combine",
         {[](auto& v) { return ad::scalar_affine_combine(v[0], v[1], v[2], v[3], v[4]); },
          {rnd(3, 2, b + 3), rnd(1, 1, b + 4), rnd(3, 2, b + 5), rnd(1, 1, b + 6), rnd(3, 2, b + 7)}}},
        {"recurrence_step",
         {[&](auto& v) { return ad::recurrence_step(op, 1.0, v[0], v[1], v[2], v[3]); },
          {rnd(6, 2, b + 27), rnd(1, 1, b + 28), rnd(6, 2, b + 29), rnd(1, 1, b + 30)}}},
        {"recurrence_step scaled, no s1",
         {[&](auto& v) { return ad::recurrence_step(op, 2.0, v[0], Tensor(), v[1], v[2]); },
          {rnd(6, 2, b + 31), rnd(6, 2, b + 32), rnd(1, 1, b + 33)}}},
        {"concat_matmul",
         {[](auto& v) {
            const Tensor parts[] = {v[0], v[1], v[0]};
            return ad::concat_matmul(parts, v[2]);
          },
          {rnd(3, 2, b + 34), rnd(3, 4, b + 35), rnd(8, 3, b + 36)}}},
        {"layernorm",
         {[](auto& v) { return ad::layernorm(v[0], v[1], v[2]); },
          {rnd(4, 5, b + 8), rnd(1, 5, b + 9), rnd(1, 5, b + 10)}}},
        {"relu", {[](auto& v) { return ad::relu(v[0]); }, {rnd(4, 3, b + 11)}}},
        {"dropout", {[&](auto& v) { return ad::dropout(v[0], 0.5, b, true); }, {rnd(4, 3, b + 12)}}},
        {"concat_cols",
         {[](auto& v) {
            const Tensor parts[] = {v[0], v[1], v[0]};
            return ad::concat_cols(parts);
          },
          {rnd(3, 2, b + 13), rnd(3, 4, b + 14)}}},
        {"add_row_bias", {[](auto& v) { return ad::add_row_bias(v[0], v[1]); }, {rnd(4, 3, b + 15), rnd(1, 3, b + 16)}}},
        {"log_softmax_rows", {[](auto& v) { return ad::log_softmax_rows(v[0]); }, {rnd(4, 3, b + 17, -3, 3)}}},
        {"nll_loss_masked",
         {[](auto& v) {
            static const int labels[] = {0, 2, 1, 1};
            static const std::uint8_t mask[] = {1, 1, 0, 1};
            return ad::nll_loss_masked(v[0], labels, mask);
          },
          {rnd(4, 3, b + 18)}}},
        {"sum", {[](auto& v) { return ad::sum(v[0]); }, {rnd(3, 3, b + 19)}}},
        {"softplus_s", {[](auto& v) { return ad::softplus_s(v[0]); }, {rnd(1, 1, b + 20, -3, 3)}}},
        {"sigmoid_s", {[](auto& v) { return ad::sigmoid_s(v[0]); }, {rnd(1, 1, b + 21, -3, 3)}}},
        {"affine_s", {[](auto& v) { return ad::affine_s(v[0], -1.7, 0.3); }, {rnd(1, 1, b + 22)}}},
        {"mul_s", {[](auto& v) { return ad::mul_s(v[0], v[1]); }, {rnd(1, 1, b + 23), rnd(1, 1, b + 24)}}},
        {"div_s", {[](auto& v) { return ad::div_s(v[0], v[1]); }, {rnd(1, 1, b + 25), rnd(1, 1, b + 26, 0.5, 2)}}},
    };
    for (const auto& [name, c] : cases) {
      CAPTURE(name);
      CHECK(gradient_error(c.first, c.second, b + 99) <= 1e-4);
    }
  }
}

TEST_CASE("fused ops match their unfused compositions exactly") {
  const CsrMatrix op = laplacian_scaled(symmetrize_dedup(oracle::random_graph(7, 0.4, 5)));
  Tape t;
  const Tensor x1 = t.constant(rnd(7, 3, 1)), x0 = t.constant(rnd(7, 3, 2));
  const Tensor s1 = t.scalar(0.7), s0 = t.scalar(-1.3);
  CHECK(ad::recurrence_step(op, 1.0, x1, s1, x0, s0).value() ==
        ad::scalar_affine_combine(x1, s1, x0, s0, ad::spmm_const(op, x1)).value());
  const Tensor a = t.constant(rnd(7, 2, 3)), b = t.constant(rnd(7, 4, 4)), w = t.constant(rnd(6, 5, 5));
  const Tensor parts[] = {a, b};
  CHECK(ad::concat_matmul(parts, w).value() == ad::matmul(ad::concat_cols(parts), w).value());
}

TEST_CASE("a node consumed twice accumulates both gradient contributions") {
  Tape t;
  const Tensor x = t.variable(Matrix::from_rows({{2.0}}));
  const Tensor y = ad::mul_s(x, x);  // x used twice by the same op
  const Tensor z = ad::mul_s(y, x);  // and once more here
  const ad::GradientMap g = t.backward(z);
  CHECK(g.of(x)(0, 0) == doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("backward may run only once and unused variables get zero gradients") {
  Tape t;
  const Tensor x = t.variable(Matrix(2, 2, 1.0));
  const Tensor unused = t.variable(Matrix(1, 3, 1.0));
  const Tensor loss = ad::sum(x);
  const ad::GradientMap g = t.backward(loss);
  CHECK(g.of(unused) == Matrix(1, 3, 0.0));
  CHECK_THROWS(t.backward(loss));
}

TEST_CASE("two identical forward and backward passes give bit-identical gradients") {
  auto run = [] {
    Tape t;
    const Tensor x = t.variable(rnd(5, 4, 1));
    const Tensor w = t.variable(rnd(4, 3, 2));
    const Tensor h = ad::dropout(ad::relu(ad::matmul(x, w)), 0.5, 9, true);
    const int labels[] = {0, 1, 2, 1, 0};
    const std::uint8_t mask[] = {1, 1, 1, 1, 1};
    const ad::GradientMap g = t.backward(ad::nll_loss_masked(ad::log_softmax_rows(h), labels, mask));
    return std::pair{g.of(x), g.of(w)};
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("log-softmax rows exponentiate to one") {
  Tape t;
  const Tensor out = ad::log_softmax_rows(t.constant(rnd(20, 7, 5, -30, 30)));
  for (std::size_t r = 0; r < 20; ++r) {
    double s = 0.0;
    for (double v : out.value().row(r)) s += std::exp(v);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("dropout is the identity at p = 0 and unbiased at p = 0.5") {
  Tape t;
  const Tensor x = t.constant(rnd(3, 3, 8));
  CHECK(ad::dropout(x, 0.0, 1, true).value() == x.value());
  CHECK(ad::dropout(x, 0.5, 1, false).value() == x.value());

  const Tensor ones = t.constant(Matrix(1, 1, 1.0));
  const int draws = 10000;
  double total = 0.0;
  for (int s = 0; s < draws; ++s) total += ad::dropout(ones, 0.5, static_cast<std::uint64_t>(s), true).item();
  // Each draw is 0 or 2 with equal probability: mean 1, variance 1.
  const double sigma = 1.0 / std::sqrt(static_cast<double>(draws));
  CHECK(std::abs(total / draws - 1.0) <= 3.0 * sigma);
}
