#include <cmath>
#include <stdexcept>
#include <numbers>

#include "doctest.h"

#include "polyfilter/oracles.hpp"
#include "polyfilter/poly_basis.hpp"
#include "polyfilter/random.hpp"

using namespace polyfilter;

namespace {

std::pair<double, double> coeffs(const BasisFamily& f, int k) {
  ad::Tape t;
  const RecurrenceCoeffs c = recurrence_coeffs(effective_params(bind_family_constant(f, t)), k);
  return {c.b.item(), c.c.item()};
}

BasisFamily laguerre(double alpha) { return LaguerreFamily{softplus_inverse(alpha + kAlphaOffset)}; }

std::vector<double> scalar_bases(const BasisFamily& f, double x, int k) {
  const CsrMatrix op(1, 1, {0, 1}, {0}, {x});
  ad::Tape t;
  std::vector<double> out;
  for (const ad::Tensor& b : generate_bases(bind_family_constant(f, t), op, t.constant(Matrix::scalar(1.0)), k))
    out.push_back(b.item());
  return out;
}

}  // namespace

TEST_CASE("family names round-trip") {
  for (FamilyKind k : {FamilyKind::Chebyshev, FamilyKind::Laguerre, FamilyKind::Meixner, FamilyKind::Krawtchouk})
    CHECK(parse_family(to_string(k)) == k);
  CHECK_THROWS_AS(parse_family("hermite"), std::invalid_argument);
}

TEST_CASE("shape transforms") {
  CHECK(effective_values(LaguerreFamily{0.0}).alpha == doctest::Approx(std::numbers::ln2 - 0.99).epsilon(1e-14));
  const double floor_alpha = effective_values(LaguerreFamily{-1000.0}).alpha;
  CHECK(floor_alpha >= -0.99);
  CHECK(floor_alpha > -1.0);
  CHECK(effective_values(MeixnerFamily{0.0, 0.0}).c == 0.5);
  CHECK(std::isnan(effective_values(ChebyshevFamily{}).alpha));
}

TEST_CASE("initial families are the neutral members") {
  CHECK(std::abs(effective_values(initial_family(FamilyKind::Laguerre)).alpha) <= 1e-15);
  const ShapeValues m = effective_values(initial_family(FamilyKind::Meixner));
  CHECK(m.beta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.c == 0.5);
  CHECK(effective_values(initial_family(FamilyKind::Krawtchouk)).p == 0.5);
  CHECK(std::get<KrawtchoukFamily>(initial_family(FamilyKind::Krawtchouk, 7)).n == 7);
}

TEST_CASE("effective parameters stay in their domains for any raw value") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double r1 = rng.uniform(-40, 40), r2 = rng.uniform(-30, 30);
    CHECK(effective_values(LaguerreFamily{r1}).alpha > -1.0);
    const ShapeValues m = effective_values(MeixnerFamily{r1, r2});
    CHECK(m.beta >= 0.0);
    CHECK(m.c > 0.0);
    CHECK(m.c < 1.0);
    const ShapeValues k = effective_values(KrawtchoukFamily{r2, 10});
    CHECK(k.p > 0.0);
    CHECK(k.p < 1.0);
  }
}

TEST_CASE("recurrence coefficient examples") {
  const auto [b1, c1] = coeffs(laguerre(0.0), 1);
  CHECK(b1 == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(c1 == doctest::Approx(1.0).epsilon(1e-14));

  for (double a : {-0.5, 0.0, 0.8, 3.0}) {
    const auto [b0, c0] = coeffs(laguerre(a), 0);
    CHECK(b0 == doctest::Approx(a + 1.0).epsilon(1e-14));
    CHECK(c0 == 0.0);
  }
  CHECK(coeffs(KrawtchoukFamily{0.0, 10}, 1).second == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(coeffs(MeixnerFamily{softplus_inverse(1.0), 0.0}, 2).second == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("Laguerre coefficients grow quadratically") {
  const double c50 = coeffs(laguerre(0.0), 50).second;
  CHECK(std::abs(c50 / 2500.0 - 1.0) <= 0.05);
}

TEST_CASE("Krawtchouk coefficients are bounded") {
  const int n = 10;
  double worst = 0.0;
  for (int k = 0; k <= n; ++k) worst = std::max(worst, coeffs(KrawtchoukFamily{0.0, n}, k).second);
  CHECK(worst <= n * (n + 2) / 4.0);
  CHECK_THROWS_AS(coeffs(KrawtchoukFamily{0.0, n}, n + 1), std::out_of_range);
}

TEST_CASE("generate_bases on a scalar operator") {
  for (const BasisFamily& f : {BasisFamily{ChebyshevFamily{}}, laguerre(0.3), BasisFamily{MeixnerFamily{0.1, 0.2}},
                               BasisFamily{KrawtchoukFamily{0.4, 10}}}) {
    const std::vector<double> one = scalar_bases(f, 0.37, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 1.0);
  }
  const std::vector<double> lag = scalar_bases(laguerre(0.0), 0.5, 3);
  CHECK(lag[0] == 1.0);
  CHECK(lag[1] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(lag[2] == doctest::Approx(0.25).epsilon(1e-13));

  const std::vector<double> cheb = scalar_bases(ChebyshevFamily{}, 0.5, 3);
  CHECK(cheb == std::vector<double>{1.0, 0.5, -0.5});
}

TEST_CASE("generate_bases rejects invalid basis counts") {
  const CsrMatrix op = CsrMatrix::identity(2);
  ad::Tape t;
  const ad::Tensor x = t.constant(Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(generate_bases(bind_family_constant(laguerre(0.0), t), op, x, 0), std::invalid_argument);
  const BoundFamily kr = bind_family_constant(KrawtchoukFamily{0.0, 4}, t);
  CHECK_NOTHROW(generate_bases(kr, op, x, 5));
  CHECK_THROWS_AS(generate_bases(kr, op, x, 6), std::invalid_argument);
}

TEST_CASE("closed-form Laguerre reference values") {
  CHECK(oracle::monic_laguerre_reference(0, 1.3, 7.0) == 1.0);
  CHECK(oracle::monic_laguerre_reference(1, 0.5, 2.0) == doctest::Approx(0.5));
  CHECK(oracle::monic_laguerre_reference(2, 0.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("recurrence matches the closed-form expansion") {
  for (double a : {-0.5, 0.0, 1.0, 2.5}) {
    const BasisFamily f = laguerre(a);
    const double alpha = effective_values(f).alpha;
    for (int i = 0; i < 20; ++i) {
      const double x = i / 19.0;
      const std::vector<double> vals = scalar_bases(f, x, 6);
      for (int k = 0; k <= 5; ++k) {
        const double ref = oracle::monic_laguerre_reference(k, alpha, x);
        CHECK(std::abs(vals[static_cast<std::size_t>(k)] - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
      }
    }
  }
}

TEST_CASE("Laguerre bases are orthogonal under Gauss-Laguerre quadrature") {
  for (double a : {0.0, 1.0}) {
    const BasisFamily f = laguerre(a);
    const oracle::Quadrature q = oracle::gauss_laguerre(64, effective_values(f).alpha);
    double g[5][5] = {};
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const std::vector<double> p = scalar_bases(f, q.nodes[i], 5);
      for (std::size_t m = 0; m < 5; ++m)
        for (std::size_t n = 0; n < 5; ++n) g[m][n] += q.weights[i] * p[m] * p[n];
    }
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 5; ++n)
        if (m != n) CHECK(std::abs(g[m][n]) / std::sqrt(g[m][m] * g[n][n]) <= 1e-8);
    // The squared norm of the monic degree-n polynomial is n! * Gamma(n + alpha + 1).
    CHECK(g[3][3] == doctest::Approx(6.0 * std::tgamma(3.0 + a + 1.0)).epsilon(1e-9));
  }
}

TEST_CASE("shape-parameter gradients match finite differences") {
  const EdgeList g = oracle::random_graph(20, 0.2, 4);
  const Matrix x = oracle::random_matrix(20, 4, 5);
  std::vector<int> labels(20);
  std::vector<std::uint8_t> mask(20, 1);
  for (std::size_t i = 0; i < 20; ++i) labels[i] = static_cast<int>(i % 3);
  ModelConfig cfg;
  cfg.num_bases = 4;
  cfg.hidden = 5;
  for (FamilyKind kind : {FamilyKind::Laguerre, FamilyKind::Meixner, FamilyKind::Krawtchouk}) {
    cfg.family = kind;
    NodeClassifier m = NodeClassifier::create(cfg, 4, 3, 8);
    int checked = 0;
    for (const oracle::GroupCheck& c : oracle::check_model_gradients(m, g, x, labels, mask, 1)) {
      if (c.name.find("_raw") == std::string::npos) continue;
      CAPTURE(c.name);
      CHECK(c.rel_error <= 1e-4);
      ++checked;
    }
    CHECK(checked >= 2);
  }
}
