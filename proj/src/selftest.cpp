#include "polyfilter/selftest.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "polyfilter/oracles.hpp"
#include "polyfilter/random.hpp"

namespace polyfilter {

bool SelftestReport::ok() const {
  for (const auto& s : suites)
    if (!s.ok()) return false;
  return !suites.empty();
}

namespace {

void expect(SuiteResult& s, bool cond, const std::string& what) {
  ++s.total;
  if (cond) {
    ++s.passed;
  } else if (s.failures.size() < 20) {
    s.failures.push_back(what);
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

BasisFamily laguerre_with_alpha(double alpha) { return LaguerreFamily{softplus_inverse(alpha + kAlphaOffset)}; }

// Bases of a family on a 1x1 operator [x] applied to the input [[1]]: the
// polynomial values P_0(x), ..., P_{K-1}(x).
std::vector<double> polynomial_values(const BasisFamily& f, double x, int num_bases) {
  const CsrMatrix op(1, 1, {0, 1}, {0}, {x});
  ad::Tape tape;
  const BoundFamily bound = bind_family_constant(f, tape);
  std::vector<double> out;
  for (const ad::Tensor& t : generate_bases(bound, op, tape.constant(Matrix::scalar(1.0)), num_bases))
    out.push_back(t.item());
  return out;
}

SuiteResult coefficient_suite() {
  SuiteResult s;
  s.name = "recurrence_coefficients";
  auto coeffs_of = [](const BasisFamily& f, int k) {
    ad::Tape tape;
    const RecurrenceCoeffs c = recurrence_coeffs(effective_params(bind_family_constant(f, tape)), k);
    return std::pair{c.b.item(), c.c.item()};
  };
  const auto [b1, c1] = coeffs_of(laguerre_with_alpha(0.0), 1);
  expect(s, std::abs(b1 - 3.0) < 1e-12 && std::abs(c1 - 1.0) < 1e-12,
         "Laguerre k=1 alpha=0: got (" + fmt(b1) + ", " + fmt(c1) + "), want (3, 1)");
  const auto [b0, c0] = coeffs_of(laguerre_with_alpha(0.7), 0);
  expect(s, std::abs(b0 - 1.7) < 1e-12 && c0 == 0.0, "Laguerre k=0 alpha=0.7: got (" + fmt(b0) + ", " + fmt(c0) + ")");
  const auto [kb, kc] = coeffs_of(KrawtchoukFamily{0.0, 10}, 1);
  expect(s, std::abs(kc - 2.5) < 1e-12 && std::abs(kb - 5.0) < 1e-12,
         "Krawtchouk k=1 N=10 p=0.5: got (" + fmt(kb) + ", " + fmt(kc) + "), want (5, 2.5)");
  const auto [mb, mc] = coeffs_of(MeixnerFamily{softplus_inverse(1.0), 0.0}, 2);
  expect(s, std::abs(mc - 8.0) < 1e-12 && std::abs(mb - 7.0) < 1e-12,
         "Meixner k=2 beta=1 c=0.5: got (" + fmt(mb) + ", " + fmt(mc) + "), want (7, 8)");
  return s;
}

SuiteResult recurrence_suite() {
  SuiteResult s;
  s.name = "laguerre_expansion";
  for (double alpha : {-0.5, 0.0, 1.0, 2.5}) {
    const BasisFamily fam = laguerre_with_alpha(alpha);
    const double a = effective_values(fam).alpha;
    for (int i = 0; i < 20; ++i) {
      const double x = i / 19.0;
      const std::vector<double> vals = polynomial_values(fam, x, 6);
      for (int k = 0; k <= 5; ++k) {
        const double ref = oracle::monic_laguerre_reference(k, a, x);
        const double err = std::abs(vals[static_cast<std::size_t>(k)] - ref) / std::max(1.0, std::abs(ref));
        expect(s, err <= 1e-10,
               "alpha=" + fmt(alpha) + " k=" + std::to_string(k) + " x=" + fmt(x) + ": rel error " + fmt(err));
      }
    }
  }
  return s;
}

SuiteResult orthogonality_suite() {
  SuiteResult s;
  s.name = "gauss_laguerre_orthogonality";
  for (double alpha : {0.0, 1.0}) {
    const BasisFamily fam = laguerre_with_alpha(alpha);
    const double a = effective_values(fam).alpha;
    const oracle::Quadrature q = oracle::gauss_laguerre(64, a);
    double wsum = 0.0;
    for (double w : q.weights) wsum += w;
    const double gamma = std::tgamma(a + 1.0);
    expect(s, std::abs(wsum - gamma) <= 1e-12 * gamma, "alpha=" + fmt(alpha) + ": weights sum " + fmt(wsum));

    constexpr int kDeg = 5;
    double gram[kDeg][kDeg] = {};
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const std::vector<double> p = polynomial_values(fam, q.nodes[i], kDeg);
      for (int m = 0; m < kDeg; ++m)
        for (int n = 0; n < kDeg; ++n) gram[m][n] += q.weights[i] * p[static_cast<std::size_t>(m)] * p[static_cast<std::size_t>(n)];
    }
    for (int m = 0; m < kDeg; ++m)
      for (int n = m + 1; n < kDeg; ++n) {
        const double cosine = std::abs(gram[m][n]) / std::sqrt(gram[m][m] * gram[n][n]);
        expect(s, cosine <= 1e-8,
               "alpha=" + fmt(alpha) + " <P" + std::to_string(m) + ",P" + std::to_string(n) + ">: " + fmt(cosine));
      }
  }
  return s;
}

std::vector<BasisFamily> sample_families(std::uint64_t seed) {
  Rng rng(seed);
  return {ChebyshevFamily{}, LaguerreFamily{rng.uniform(-1.0, 1.5)},
          MeixnerFamily{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, KrawtchoukFamily{rng.uniform(-1.0, 1.0), 10}};
}

void randomize_layer(PolyConvLayer& l, std::uint64_t seed) {
  Rng rng(seed);
  for (auto* group : {&l.ln_gamma, &l.ln_beta})
    for (Matrix& m : *group)
      for (double& v : m.data) v = rng.uniform(0.5, 1.5) * (group == &l.ln_beta ? 0.4 : 1.0);
  for (double& v : l.bias.data) v = rng.uniform(-0.5, 0.5);
}

SuiteResult dense_oracle_suite() {
  SuiteResult s;
  s.name = "dense_oracle_equivalence";
  std::uint64_t seed = 100;
  for (std::size_t n : {12u, 32u}) {
    EdgeList graph = oracle::random_graph(n, 0.2, seed++);
    graph.edges.emplace_back(0, 0);  // self-loop, must be ignored
    graph.n_nodes = n + 1;           // trailing isolated node
    const Matrix x = oracle::random_matrix(n + 1, 5, seed++);
    const GraphOperators ops = GraphOperators::from_adjacency(symmetrize_dedup(graph));
    for (const BasisFamily& fam : sample_families(seed++)) {
      for (int k : {1, 2, 3, 5}) {
        PolyConvLayer layer = PolyConvLayer::create(fam, k, 5, 4, seed++);
        randomize_layer(layer, seed++);
        ad::Tape tape;
        ParameterBinding binding(tape);
        const Matrix got = conv_forward(layer, ops, tape.constant(x), binding).value();
        const Matrix want = oracle::dense_conv_forward(layer, graph, x);
        const double err = max_abs_diff(got, want);
        expect(s, err <= 1e-10,
               std::string(to_string(kind_of(fam))) + " n=" + std::to_string(n) + " K=" + std::to_string(k) +
                   ": max abs error " + fmt(err));
      }
    }
  }
  return s;
}

SuiteResult gradient_suite() {
  SuiteResult s;
  s.name = "finite_difference_gradients";
  const std::size_t n = 20, f = 5, classes = 3;
  const EdgeList graph = oracle::random_graph(n, 0.2, 7);
  const Matrix x = oracle::random_matrix(n, f, 8);
  Rng rng(9);
  std::vector<int> labels(n);
  std::vector<std::uint8_t> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(rng.below(classes));
    mask[i] = i % 4 != 3;
  }
  std::uint64_t seed = 200;
  for (const BasisFamily& fam : sample_families(11)) {
    ModelConfig cfg;
    cfg.family = kind_of(fam);
    cfg.num_bases = 4;
    cfg.hidden = 6;
    NodeClassifier model = NodeClassifier::create(cfg, f, classes, seed++);
    model.layer1.family = fam;
    model.layer2.family = fam;
    randomize_layer(model.layer1, seed++);
    randomize_layer(model.layer2, seed++);
    for (const oracle::GroupCheck& g : oracle::check_model_gradients(model, graph, x, labels, mask, 1234)) {
      expect(s, g.rel_error <= 1e-4,
             std::string(to_string(cfg.family)) + " " + g.name + ": rel error " + fmt(g.rel_error));
    }
  }
  return s;
}

}  // namespace

SelftestReport run_selftest() {
  const auto start = std::chrono::steady_clock::now();
  SelftestReport r;
  r.suites.push_back(coefficient_suite());
  r.suites.push_back(recurrence_suite());
  r.suites.push_back(orthogonality_suite());
  r.suites.push_back(dense_oracle_suite());
  r.suites.push_back(gradient_suite());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void print_report(const SelftestReport& report, std::ostream& os) {
  for (const SuiteResult& s : report.suites) {
    os << (s.ok() ? "PASS " : "FAIL ") << s.name << " " << s.passed << "/" << s.total << "\n";
    for (const std::string& f : s.failures) os << "    " << f << "\n";
  }
  os << (report.ok() ? "selftest passed" : "selftest FAILED") << " in " << std::fixed << std::setprecision(2)
     << report.seconds << "s\n";
}

}  // namespace polyfilter
