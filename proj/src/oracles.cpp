#include "polyfilter/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polyfilter/random.hpp"

namespace polyfilter::oracle {

double monic_laguerre_reference(int k, double alpha, double x) {
  if (k < 0) throw std::invalid_argument("degree must be non-negative");
  double result = 0.0;
  double binom = 1.0;  // C(k, i), built up from i = 0
  for (int i = 0; i <= k; ++i) {
    if (i > 0) binom = binom * (k - i + 1) / i;
    double rising = 1.0;
    for (int j = i + 1; j <= k; ++j) rising *= alpha + j;
    const double sign = ((k - i) % 2 == 0) ? 1.0 : -1.0;
    result += sign * binom * rising * std::pow(x, i);
  }
  return result;
}

Quadrature gauss_laguerre(int n, double alpha) {
  if (n < 1) throw std::invalid_argument("quadrature order must be positive");
  Quadrature q{std::vector<double>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  const double nd = n;
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    // Standard asymptotic initial guesses, then Newton on L_n^(alpha) evaluated
    // by its classical (non-monic) recurrence.
    if (i == 0) {
      z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * nd + 1.8 * alpha);
    } else if (i == 1) {
      z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * nd);
    } else {
      const double ai = i - 1;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) *
           (z - q.nodes[static_cast<std::size_t>(i - 2)]) / (1.0 + 0.3 * alpha);
    }
    double p1 = 0.0, p2 = 0.0, pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      p1 = 1.0;
      p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0 + alpha - z) * p2 - (j - 1.0 + alpha) * p3) / j;
      }
      pp = (nd * p1 - (nd + alpha) * p2) / z;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::abs(z)) break;
    }
    q.nodes[static_cast<std::size_t>(i)] = z;
    q.weights[static_cast<std::size_t>(i)] = -std::exp(std::lgamma(alpha + nd) - std::lgamma(nd)) / (pp * nd * p2);
  }
  return q;
}

namespace {

Matrix dense_adjacency(const EdgeList& edges) {
  Matrix a(edges.n_nodes, edges.n_nodes);
  for (const auto& [s, d] : edges.edges) {
    if (s == d) continue;
    a(s, d) = 1.0;
    a(d, s) = 1.0;
  }
  return a;
}

Matrix normalized_adjacency(const EdgeList& edges) {
  Matrix a = dense_adjacency(edges);
  const std::size_t n = a.rows;
  std::vector<double> dinv(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += a(i, j);
    dinv[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= dinv[i] * dinv[j];
  return a;
}

Matrix dense_mul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

double softplus(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// (b_k, c_k) straight from the closed forms.
std::pair<double, double> coeffs(const BasisFamily& f, int k) {
  const double kd = k;
  if (const auto* l = std::get_if<LaguerreFamily>(&f)) {
    const double a = softplus(l->alpha_raw) - 0.99;
    return {2.0 * kd + a + 1.0, kd * (kd + a)};
  }
  if (const auto* m = std::get_if<MeixnerFamily>(&f)) {
    const double beta = softplus(m->beta_raw), c = sigmoid(m->c_raw);
    return {(kd + (kd + beta) * c) / (1.0 - c), c * kd * (kd + beta - 1.0) / ((1.0 - c) * (1.0 - c))};
  }
  if (const auto* kr = std::get_if<KrawtchoukFamily>(&f)) {
    const double p = sigmoid(kr->p_raw), n = kr->n;
    return {p * (n - kd) + kd * (1.0 - p), kd * (n - kd + 1.0) * p * (1.0 - p)};
  }
  throw std::logic_error("no monic coefficients for Chebyshev");
}

}  // namespace

Matrix dense_scaled_laplacian(const EdgeList& edges) {
  Matrix l = normalized_adjacency(edges);
  for (double& v : l.data) v = -0.5 * v;
  for (std::size_t i = 0; i < l.rows; ++i) l(i, i) += 0.5;
  return l;
}

Matrix dense_chebyshev_operator(const EdgeList& edges) {
  Matrix l = normalized_adjacency(edges);
  for (double& v : l.data) v = -v;
  return l;
}

Matrix dense_conv_forward(const PolyConvLayer& layer, const EdgeList& edges, const Matrix& x) {
  const bool cheb = std::holds_alternative<ChebyshevFamily>(layer.family);
  const Matrix op = cheb ? dense_chebyshev_operator(edges) : dense_scaled_laplacian(edges);
  const std::size_t n = x.rows, f = x.cols;
  const auto K = static_cast<std::size_t>(layer.num_bases);

  std::vector<Matrix> bases{x};
  for (std::size_t k = 0; k + 1 < K; ++k) {
    Matrix next = dense_mul(op, bases[k]);
    if (cheb) {
      if (k > 0)
        for (std::size_t i = 0; i < next.size(); ++i) next.data[i] = 2.0 * next.data[i] - bases[k - 1].data[i];
    } else {
      const auto [b, c] = coeffs(layer.family, static_cast<int>(k));
      for (std::size_t i = 0; i < next.size(); ++i) {
        next.data[i] -= b * bases[k].data[i];
        if (k > 0) next.data[i] -= c * bases[k - 1].data[i];
      }
    }
    bases.push_back(std::move(next));
  }

  Matrix z(n, K * f);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t r = 0; r < n; ++r) {
      double mean = 0.0, var = 0.0;
      for (std::size_t j = 0; j < f; ++j) mean += bases[k](r, j);
      mean /= static_cast<double>(f);
      for (std::size_t j = 0; j < f; ++j) var += (bases[k](r, j) - mean) * (bases[k](r, j) - mean);
      var /= static_cast<double>(f);
      for (std::size_t j = 0; j < f; ++j) {
        z(r, k * f + j) = layer.use_layernorm ? layer.ln_gamma[k](0, j) * (bases[k](r, j) - mean) /
                                                        std::sqrt(var + kLayerNormEps) +
                                                    layer.ln_beta[k](0, j)
                                              : bases[k](r, j);
      }
    }
  }
  Matrix out = dense_mul(z, layer.weight);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < out.cols; ++j) out(r, j) += layer.bias(0, j);
  return out;
}

std::vector<double> central_difference(const std::function<double()>& f, std::span<double> params, double step) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params[i];
    params[i] = orig + step;
    const double fp = f();
    params[i] = orig - step;
    const double fm = f();
    params[i] = orig;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

std::vector<GroupCheck> check_model_gradients(NodeClassifier& model, const EdgeList& edges, const Matrix& x,
                                              std::span<const int> labels, std::span<const std::uint8_t> mask,
                                              std::uint64_t dropout_seed, double step) {
  const GraphOperators ops = GraphOperators::from_adjacency(symmetrize_dedup(edges));
  auto loss_value = [&] {
    ad::Tape tape;
    ParameterBinding binding(tape, false);
    const ad::Tensor logp = model_forward(model, ops, tape.constant(x), binding, true, dropout_seed);
    return ad::nll_loss_masked(logp, labels, mask).item();
  };

  ad::Tape tape;
  ParameterBinding binding(tape);
  const ad::Tensor logp = model_forward(model, ops, tape.constant(x), binding, true, dropout_seed);
  const ad::GradientMap grads = tape.backward(ad::nll_loss_masked(logp, labels, mask));

  std::vector<GroupCheck> out;
  for (const ParamRef& p : model.parameters()) {
    const Matrix* analytic = nullptr;
    for (const BoundParameter& bp : binding.bound())
      if (bp.ref.values.data() == p.values.data()) analytic = &grads.of(bp.tensor);
    if (!analytic) continue;  // not used by the forward pass
    const std::vector<double> fd = central_difference(loss_value, p.values, step);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) {
      diff = std::max(diff, std::abs(analytic->data[i] - fd[i]));
      norm = std::max(norm, std::abs(fd[i]));
    }
    out.push_back({p.name, diff / std::max(norm, 1e-7), norm});
  }
  return out;
}

EdgeList random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  EdgeList e{n, {}};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) e.edges.emplace_back(i, j);
  return e;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace polyfilter::oracle
