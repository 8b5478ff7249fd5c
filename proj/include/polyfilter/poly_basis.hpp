#pragma once

// Orthogonal-polynomial feature bases.
//
// The monic families follow P_{k+1}(x) = (x - b_k) P_k(x) - c_k P_{k-1}(x),
// P_0 = 1, applied with x replaced by a graph operator acting on node features.
// Shape parameters are stored unconstrained ("raw") and mapped to their valid
// domain through softplus / sigmoid, so every raw value yields a valid family.

#include <string_view>
#include <variant>
#include <vector>

#include "polyfilter/autodiff.hpp"
#include "polyfilter/parameters.hpp"
#include "polyfilter/sparse.hpp"

namespace polyfilter {

enum class FamilyKind { Chebyshev, Laguerre, Meixner, Krawtchouk };

std::string_view to_string(FamilyKind kind);
/// Accepts "chebyshev", "laguerre", "meixner", "krawtchouk". Throws std::invalid_argument otherwise.
FamilyKind parse_family(std::string_view name);

struct ChebyshevFamily {};
struct LaguerreFamily {
  double alpha_raw;
};
struct MeixnerFamily {
  double beta_raw;
  double c_raw;
};
struct KrawtchoukFamily {
  double p_raw;
  int n;  // fixed, not learned
};

using BasisFamily = std::variant<ChebyshevFamily, LaguerreFamily, MeixnerFamily, KrawtchoukFamily>;

inline constexpr int kDefaultKrawtchoukN = 10;
/// Lower bound of the Laguerre shape parameter: alpha = softplus(alpha_raw) - kAlphaOffset.
inline constexpr double kAlphaOffset = 0.99;

FamilyKind kind_of(const BasisFamily& f);

/// Family with neutral initial shape: alpha = 0, beta = 1, c = 0.5, p = 0.5.
BasisFamily initial_family(FamilyKind kind, int krawtchouk_n = kDefaultKrawtchoukN);

double softplus_inverse(double y);

/// Learnable raw scalars of a family, in a fixed order, named alpha_raw / beta_raw / c_raw / p_raw.
std::vector<ParamRef> shape_parameters(BasisFamily& f);

/// Family whose raw shape parameters live on a tape.
struct BoundFamily {
  FamilyKind kind = FamilyKind::Chebyshev;
  ad::Tensor alpha_raw, beta_raw, c_raw, p_raw;
  int krawtchouk_n = kDefaultKrawtchoukN;
};

BoundFamily bind_family(BasisFamily& f, ParameterBinding& binding);
/// Binds a copy of the family as tape constants.
BoundFamily bind_family_constant(const BasisFamily& f, ad::Tape& tape);

/// Effective (constrained) shape parameters as tape scalars; unused ones are undefined.
struct EffectiveParams {
  FamilyKind kind = FamilyKind::Chebyshev;
  ad::Tensor alpha, beta, c, p;
  int krawtchouk_n = kDefaultKrawtchoukN;
};

EffectiveParams effective_params(const BoundFamily& f);

/// Plain values of the effective shape parameters; NaN where a family lacks one.
struct ShapeValues {
  double alpha;
  double beta;
  double c;
  double p;
};

ShapeValues effective_values(const BasisFamily& f);

struct RecurrenceCoeffs {
  ad::Tensor b;
  ad::Tensor c;
};

/// (b_k, c_k) of the monic three-term recurrence. For Chebyshev both are
/// undefined: that family uses its own two-term form inside generate_bases.
/// Throws std::out_of_range for Krawtchouk k > N.
RecurrenceCoeffs recurrence_coeffs(const EffectiveParams& p, int k);

/// Scaled Laplacian for the monic families, shifted operator for Chebyshev.
struct GraphOperators {
  CsrMatrix scaled_laplacian;
  CsrMatrix chebyshev;

  static GraphOperators from_adjacency(const CsrMatrix& adjacency);
  const CsrMatrix& for_family(FamilyKind kind) const {
    return kind == FamilyKind::Chebyshev ? chebyshev : scaled_laplacian;
  }
};

/// The K feature bases [X_0, ..., X_{K-1}] with X_0 = x, recorded on x's tape.
/// Monic: X_1 = L·x - b_0·x, X_{k+1} = L·X_k - b_k·X_k - c_k·X_{k-1}.
/// Chebyshev: X_1 = L·x, X_{k+1} = 2·L·X_k - X_{k-1}.
/// Throws std::invalid_argument for K < 1 or (Krawtchouk) K > N + 1.
std::vector<ad::Tensor> generate_bases(const BoundFamily& f, const CsrMatrix& op, const ad::Tensor& x, int num_bases);

namespace testing {
/// Perturbs the Laguerre b_k formula, for mutation-testing the oracle suites.
void set_coefficient_fault(bool enabled);
}  // namespace testing

}  // namespace polyfilter
