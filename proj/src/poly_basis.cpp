#include "polyfilter/poly_basis.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace polyfilter {

namespace {
std::atomic<bool> g_coefficient_fault{false};
}

void testing::set_coefficient_fault(bool enabled) { g_coefficient_fault = enabled; }

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Chebyshev: return "chebyshev";
    case FamilyKind::Laguerre: return "laguerre";
    case FamilyKind::Meixner: return "meixner";
    case FamilyKind::Krawtchouk: return "krawtchouk";
  }
  return "unknown";
}

FamilyKind parse_family(std::string_view name) {
  for (auto k : {FamilyKind::Chebyshev, FamilyKind::Laguerre, FamilyKind::Meixner, FamilyKind::Krawtchouk})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown polynomial family '" + std::string(name) + "'");
}

FamilyKind kind_of(const BasisFamily& f) {
  return static_cast<FamilyKind>(f.index());
}

double softplus_inverse(double y) {
  if (y <= 0.0) throw std::domain_error("softplus_inverse requires y > 0");
  return y > 30.0 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
}

BasisFamily initial_family(FamilyKind kind, int krawtchouk_n) {
  switch (kind) {
    case FamilyKind::Chebyshev: return ChebyshevFamily{};
    case FamilyKind::Laguerre: return LaguerreFamily{softplus_inverse(kAlphaOffset)};
    case FamilyKind::Meixner: return MeixnerFamily{softplus_inverse(1.0), 0.0};
    case FamilyKind::Krawtchouk:
      if (krawtchouk_n < 1) throw std::invalid_argument("Krawtchouk N must be positive");
      return KrawtchoukFamily{0.0, krawtchouk_n};
  }
  throw std::invalid_argument("bad family kind");
}

std::vector<ParamRef> shape_parameters(BasisFamily& f) {
  std::vector<ParamRef> out;
  std::visit(
      [&](auto& fam) {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, LaguerreFamily>) {
          out.push_back({"alpha_raw", {&fam.alpha_raw, 1}});
        } else if constexpr (std::is_same_v<T, MeixnerFamily>) {
          out.push_back({"beta_raw", {&fam.beta_raw, 1}});
          out.push_back({"c_raw", {&fam.c_raw, 1}});
        } else if constexpr (std::is_same_v<T, KrawtchoukFamily>) {
          out.push_back({"p_raw", {&fam.p_raw, 1}});
        }
      },
      f);
  return out;
}

BoundFamily bind_family(BasisFamily& f, ParameterBinding& binding) {
  BoundFamily b;
  b.kind = kind_of(f);
  if (auto* k = std::get_if<KrawtchoukFamily>(&f)) b.krawtchouk_n = k->n;
  for (const ParamRef& ref : shape_parameters(f)) {
    ad::Tensor t = binding.bind(ref);
    if (ref.name == "alpha_raw") b.alpha_raw = t;
    else if (ref.name == "beta_raw") b.beta_raw = t;
    else if (ref.name == "c_raw") b.c_raw = t;
    else if (ref.name == "p_raw") b.p_raw = t;
  }
  return b;
}

BoundFamily bind_family_constant(const BasisFamily& f, ad::Tape& tape) {
  BasisFamily copy = f;
  ParameterBinding binding(tape, false);
  return bind_family(copy, binding);
}

EffectiveParams effective_params(const BoundFamily& f) {
  EffectiveParams p;
  p.kind = f.kind;
  p.krawtchouk_n = f.krawtchouk_n;
  switch (f.kind) {
    case FamilyKind::Chebyshev: break;
    case FamilyKind::Laguerre: p.alpha = ad::affine_s(ad::softplus_s(f.alpha_raw), 1.0, -kAlphaOffset); break;
    case FamilyKind::Meixner:
      p.beta = ad::softplus_s(f.beta_raw);
      p.c = ad::sigmoid_s(f.c_raw);
      break;
    case FamilyKind::Krawtchouk: p.p = ad::sigmoid_s(f.p_raw); break;
  }
  return p;
}

ShapeValues effective_values(const BasisFamily& f) {
  ad::Tape tape;
  const EffectiveParams p = effective_params(bind_family_constant(f, tape));
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return {p.alpha.defined() ? p.alpha.item() : nan, p.beta.defined() ? p.beta.item() : nan,
          p.c.defined() ? p.c.item() : nan, p.p.defined() ? p.p.item() : nan};
}

RecurrenceCoeffs recurrence_coeffs(const EffectiveParams& p, int k) {
  if (k < 0) throw std::invalid_argument("recurrence index must be non-negative");
  const double kd = k;
  switch (p.kind) {
    case FamilyKind::Chebyshev: return {};
    case FamilyKind::Laguerre: {
      // b_k = 2k + alpha + 1, c_k = k (k + alpha)
      const double fault = g_coefficient_fault ? 1e-3 : 0.0;
      return {ad::affine_s(p.alpha, 1.0, 2.0 * kd + 1.0 + fault), ad::affine_s(p.alpha, kd, kd * kd)};
    }
    case FamilyKind::Meixner: {
      // b_k = (k + (k + beta) c) / (1 - c), c_k = c k (k + beta - 1) / (1 - c)^2
      const ad::Tensor one_minus_c = ad::affine_s(p.c, -1.0, 1.0);
      const ad::Tensor b_num = ad::affine_s(ad::mul_s(ad::affine_s(p.beta, 1.0, kd), p.c), 1.0, kd);
      const ad::Tensor c_num = ad::mul_s(p.c, ad::affine_s(p.beta, kd, kd * (kd - 1.0)));
      return {ad::div_s(b_num, one_minus_c), ad::div_s(c_num, ad::mul_s(one_minus_c, one_minus_c))};
    }
    case FamilyKind::Krawtchouk: {
      const int n = p.krawtchouk_n;
      if (k > n) {
        throw std::out_of_range("Krawtchouk recurrence index " + std::to_string(k) + " exceeds N = " +
                                std::to_string(n));
      }
      // b_k = p (N - k) + k (1 - p), c_k = k (N - k + 1) p (1 - p)
      const double nd = n;
      const ad::Tensor pq = ad::mul_s(p.p, ad::affine_s(p.p, -1.0, 1.0));
      return {ad::affine_s(p.p, nd - 2.0 * kd, kd), ad::affine_s(pq, kd * (nd - kd + 1.0), 0.0)};
    }
  }
  throw std::invalid_argument("bad family kind");
}

GraphOperators GraphOperators::from_adjacency(const CsrMatrix& adjacency) {
  return {laplacian_scaled(adjacency), chebyshev_operator(adjacency)};
}

std::vector<ad::Tensor> generate_bases(const BoundFamily& f, const CsrMatrix& op, const ad::Tensor& x,
                                       int num_bases) {
  if (num_bases < 1) throw std::invalid_argument("number of bases must be at least 1");
  if (f.kind == FamilyKind::Krawtchouk && num_bases > f.krawtchouk_n + 1) {
    throw std::invalid_argument("Krawtchouk basis count " + std::to_string(num_bases) + " exceeds N + 1 = " +
                                std::to_string(f.krawtchouk_n + 1));
  }
  std::vector<ad::Tensor> bases{x};
  bases.reserve(static_cast<std::size_t>(num_bases));
  if (num_bases == 1) return bases;

  if (f.kind == FamilyKind::Chebyshev) {
    const ad::Tensor one = x.tape().scalar(1.0);
    bases.push_back(ad::spmm_const(op, x));
    for (int k = 1; k + 1 < num_bases; ++k) {
      // 2·L·X_k - X_{k-1}
      bases.push_back(ad::recurrence_step(op, 2.0, bases[k], {}, bases[k - 1], one));
    }
    return bases;
  }

  const EffectiveParams p = effective_params(f);
  const RecurrenceCoeffs c0 = recurrence_coeffs(p, 0);
  bases.push_back(ad::recurrence_step(op, 1.0, x, c0.b, {}, {}));
  for (int k = 1; k + 1 < num_bases; ++k) {
    const RecurrenceCoeffs ck = recurrence_coeffs(p, k);
    bases.push_back(ad::recurrence_step(op, 1.0, bases[k], ck.b, bases[k - 1], ck.c));
  }
  return bases;
}

}  // namespace polyfilter
