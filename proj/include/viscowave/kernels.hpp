#pragma once

// Relaxation kernels and material models: exact time-domain and
// Laplace-domain evaluation, the CBF denominator Q(p) = N p + p G~(p),
// Tauberian extraction of G(0), and a sampled complete-monotonicity check.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "viscowave/common.hpp"
#include "viscowave/numerics.hpp"

namespace viscowave {

// ---------------------------------------------------------------------------
// Kernel variants
// ---------------------------------------------------------------------------

struct PronyTerm {
  double modulus;  // g_i >= 0
  double rate;     // r_i >= 0 (zero rate = elastic plateau)
};

struct PronySeries {
  std::vector<PronyTerm> terms;
};

struct PowerLaw {
  double amplitude;  // A > 0
  double exponent;   // alpha in (0,1); G(t) = A t^-alpha / Gamma(1-alpha)
};

struct StretchedExponential {
  double exponent;    // alpha_k in (0,1)
  double time_scale;  // tau > 0; G(t) = exp(-(t/tau)^alpha_k)
};

struct ZeroKernel {};

class RelaxationKernel;

struct SumKernel {
  std::vector<RelaxationKernel> parts;
};

/// Closed tagged union of the admissible LICM kernel families.  Closedness is
/// load-bearing: the inversion and dispersion modules rely on knowing every
/// variant's branch-cut structure.
class RelaxationKernel {
public:
  using Variant =
      std::variant<ZeroKernel, PronySeries, PowerLaw, StretchedExponential, SumKernel>;

  static RelaxationKernel zero() { return RelaxationKernel(ZeroKernel{}); }

  static RelaxationKernel prony(std::vector<PronyTerm> terms) {
    if (terms.empty())
      throw std::invalid_argument("prony kernel: term list must be non-empty");
    for (const auto& t : terms) {
      if (!(t.modulus >= 0.0))
        throw std::invalid_argument("prony kernel: modulus g_i must be >= 0");
      if (!(t.rate >= 0.0))
        throw std::invalid_argument("prony kernel: decay rate r_i must be >= 0");
    }
    return RelaxationKernel(PronySeries{std::move(terms)});
  }

  static RelaxationKernel power_law(double amplitude, double exponent) {
    if (!(amplitude > 0.0))
      throw std::invalid_argument("power_law kernel: amplitude A must be > 0");
    if (!(exponent > 0.0 && exponent < 1.0))
      throw std::invalid_argument("power_law kernel: exponent alpha must lie in (0,1)");
    return RelaxationKernel(PowerLaw{amplitude, exponent});
  }

  static RelaxationKernel stretched_exponential(double exponent, double time_scale) {
    if (!(exponent > 0.0 && exponent < 1.0))
      throw std::invalid_argument(
          "stretched_exponential kernel: exponent alpha_k must lie in (0,1)");
    if (!(time_scale > 0.0))
      throw std::invalid_argument(
          "stretched_exponential kernel: time scale tau must be > 0");
    return RelaxationKernel(StretchedExponential{exponent, time_scale});
  }

  static RelaxationKernel sum(std::vector<RelaxationKernel> parts) {
    if (parts.empty())
      throw std::invalid_argument("sum kernel: part list must be non-empty");
    return RelaxationKernel(SumKernel{std::move(parts)});
  }

  const Variant& variant() const { return v_; }

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(v_);
  }

  bool is_zero() const;

private:
  explicit RelaxationKernel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

inline bool RelaxationKernel::is_zero() const {
  if (is<ZeroKernel>()) return true;
  if (is<SumKernel>()) {
    for (const auto& k : as<SumKernel>().parts)
      if (!k.is_zero()) return false;
    return true;
  }
  if (is<PronySeries>()) {
    for (const auto& t : as<PronySeries>().terms)
      if (t.modulus != 0.0) return false;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Material model
// ---------------------------------------------------------------------------

struct MaterialModel {
  double rho;               // mass density > 0
  double newtonian;         // Newtonian viscosity coefficient N >= 0
  RelaxationKernel kernel;

  static MaterialModel make(double rho, double newtonian, RelaxationKernel kernel) {
    if (!(rho > 0.0))
      throw std::invalid_argument("material model: density rho must be > 0");
    if (!(newtonian >= 0.0))
      throw std::invalid_argument("material model: Newtonian coefficient N must be >= 0");
    if (newtonian == 0.0 && kernel.is_zero())
      throw std::invalid_argument(
          "material model: N = 0 with a zero kernel describes no medium");
    return MaterialModel{rho, newtonian, std::move(kernel)};
  }
};

// ---------------------------------------------------------------------------
// Time-domain evaluation
// ---------------------------------------------------------------------------

/// G(t) for t > 0.  The power-law variant diverges at t = 0; callers that
/// need G(0) must go through g0_closed_form or tauberian_g0.
inline double eval_g(const RelaxationKernel& kernel, double t) {
  if (!(t > 0.0))
    throw std::domain_error("eval_g: t must be > 0 (kernel may be unbounded at 0)");
  struct Visitor {
    double t;
    double operator()(const ZeroKernel&) const { return 0.0; }
    double operator()(const PronySeries& k) const {
      double s = 0.0;
      for (const auto& term : k.terms) s += term.modulus * std::exp(-term.rate * t);
      return s;
    }
    double operator()(const PowerLaw& k) const {
      return k.amplitude * std::pow(t, -k.exponent) / std::tgamma(1.0 - k.exponent);
    }
    double operator()(const StretchedExponential& k) const {
      return std::exp(-std::pow(t / k.time_scale, k.exponent));
    }
    double operator()(const SumKernel& k) const {
      double s = 0.0;
      for (const auto& part : k.parts) s += eval_g(part, t);
      return s;
    }
  };
  return std::visit(Visitor{t}, kernel.variant());
}

// ---------------------------------------------------------------------------
// Laplace-domain evaluation
// ---------------------------------------------------------------------------

namespace detail {

/// G~(p) of exp(-(t/tau)^alpha) by adaptive quadrature of the defining
/// integral, with the substitution u = (t/tau)^alpha and, for complex p, a
/// Cauchy rotation of the time ray so both exponential factors decay.
inline Complex stretched_exp_laplace(double alpha, double tau, Complex p,
                                     double rel_tol = 1e-10) {
  const double phi = std::arg(p);
  const double theta_max = 0.94 * M_PI / (2.0 * alpha);
  double theta = std::clamp(-phi, -theta_max, theta_max);
  if (std::abs(phi + theta) >= 0.485 * M_PI)
    throw NumericalError(
        "stretched_exp_laplace: p outside the evaluable sector (arg p = " +
        std::to_string(phi) + ")");
  const Complex rot = std::polar(1.0, theta);
  const Complex decay_u = std::polar(1.0, alpha * theta);  // Re > 0
  const Complex pr = p * rot * tau;
  const double inv_alpha = 1.0 / alpha;
  auto f = [&](double u) -> Complex {
    if (u <= 0.0) return Complex(0.0, 0.0);
    const double upow = std::pow(u, inv_alpha);
    return std::pow(u, inv_alpha - 1.0) * std::exp(-pr * upow - decay_u * u);
  };
  // scale where the e^{-p t} factor starts to matter
  const double pscale = std::abs(pr);
  const double u1 = std::min(1.0, std::pow(std::max(pscale, 1e-30), -alpha));
  Complex head = numerics::adaptive_gk<Complex>(f, 0.0, u1, rel_tol).value;
  Complex tail = numerics::integrate_decaying<Complex>(
      f, u1, u1, rel_tol, 1e-18 * std::max(std::abs(head), 1e-30), 160);
  return (tau * inv_alpha) * rot * (head + tail);
}

inline void require_off_cut(Complex p, const char* who) {
  if (p == Complex(0.0, 0.0))
    throw std::domain_error(std::string(who) + ": p = 0 is a transform singularity");
  if (p.imag() == 0.0 && p.real() < 0.0)
    throw std::domain_error(std::string(who) +
                            ": p on the negative real axis (branch cut)");
}

}  // namespace detail

/// G~(p) = int_0^inf e^{-pt} G(t) dt, extended by continuity to the
/// imaginary axis and (for variants that admit it) into the cut plane.
inline Complex laplace_g(const RelaxationKernel& kernel, Complex p) {
  detail::require_off_cut(p, "laplace_g");
  struct Visitor {
    Complex p;
    Complex operator()(const ZeroKernel&) const { return Complex(0.0, 0.0); }
    Complex operator()(const PronySeries& k) const {
      Complex s(0.0, 0.0);
      for (const auto& term : k.terms) s += term.modulus / (p + term.rate);
      return s;
    }
    Complex operator()(const PowerLaw& k) const {
      // principal branch of p^(alpha-1), |arg p| < pi
      return k.amplitude * std::pow(p, k.exponent - 1.0);
    }
    Complex operator()(const StretchedExponential& k) const {
      return detail::stretched_exp_laplace(k.exponent, k.time_scale, p);
    }
    Complex operator()(const SumKernel& k) const {
      Complex s(0.0, 0.0);
      for (const auto& part : k.parts) s += laplace_g(part, p);
      return s;
    }
  };
  return std::visit(Visitor{p}, kernel.variant());
}

/// Q(p) = N p + p G~(p); real, non-negative and non-decreasing on p > 0.
inline Complex q_function(const MaterialModel& model, Complex p) {
  detail::require_off_cut(p, "q_function");
  return model.newtonian * p + p * laplace_g(model.kernel, p);
}

// ---------------------------------------------------------------------------
// G(0) extraction
// ---------------------------------------------------------------------------

inline ExtendedReal g0_closed_form(const RelaxationKernel& kernel) {
  struct Visitor {
    ExtendedReal operator()(const ZeroKernel&) const { return ExtendedReal::finite(0.0); }
    ExtendedReal operator()(const PronySeries& k) const {
      double s = 0.0;
      for (const auto& t : k.terms) s += t.modulus;
      return ExtendedReal::finite(s);
    }
    ExtendedReal operator()(const PowerLaw&) const { return ExtendedReal::infinity(); }
    ExtendedReal operator()(const StretchedExponential&) const {
      return ExtendedReal::finite(1.0);
    }
    ExtendedReal operator()(const SumKernel& k) const {
      double s = 0.0;
      for (const auto& part : k.parts) {
        ExtendedReal g = g0_closed_form(part);
        if (g.is_infinite()) return ExtendedReal::infinity();
        s += g.value();
      }
      return ExtendedReal::finite(s);
    }
  };
  return std::visit(Visitor{}, kernel.variant());
}

/// G(0) = lim p G~(p) on a geometric grid up to p_max: extrapolated value on
/// convergence, +infinity on sustained growth, an explicit error otherwise.
inline ExtendedReal tauberian_g0(const RelaxationKernel& kernel, double p_max) {
  if (!(p_max >= 1e3))
    throw std::invalid_argument("tauberian_g0: p_max must be >= 1e3");
  const int n = 33;           // 8 points per decade over 4 decades
  const double decades = 4.0;
  const double p_min = p_max * std::pow(10.0, -decades);
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) {
    const double p = p_min * std::pow(p_max / p_min, double(i) / double(n - 1));
    s[i] = (p * laplace_g(kernel, Complex(p, 0.0))).real();
  }
  const double scale = std::max(std::abs(s.back()), 1e-300);
  const double rel_change = std::abs(s[n - 1] - s[n - 2]) / scale;
  if (rel_change < 1e-4)
    return ExtendedReal::finite(std::max(0.0, numerics::aitken_limit(s)));
  // p G~ is non-decreasing for LICM kernels; >10% growth per decade at the
  // top of the grid indicates divergence
  const int per_decade = int((n - 1) / decades);
  const double decade_ratio = s[n - 1] / std::max(s[n - 1 - per_decade], 1e-300);
  bool monotone = true;
  for (int i = n - 1 - per_decade; i < n - 1; ++i)
    if (s[i + 1] < s[i]) monotone = false;
  if (monotone && decade_ratio > 1.1) return ExtendedReal::infinity();
  // slowly contracting tail (geometric increment ratio < 1): still convergent,
  // and Aitken extrapolation removes the dominant power term exactly
  const double d1 = s[n - 2] - s[n - 3];
  const double d2 = s[n - 1] - s[n - 2];
  if (std::abs(d1) > 0.0 && std::abs(d2 / d1) < 0.97 && d1 * d2 > 0.0)
    return ExtendedReal::finite(std::max(0.0, numerics::aitken_limit(s)));
  throw IndeterminateLimit(
      "tauberian_g0: p G~(p) neither settled nor clearly divergent by p_max = " +
      std::to_string(p_max));
}

// ---------------------------------------------------------------------------
// Complete monotonicity check
// ---------------------------------------------------------------------------

struct CmViolation {
  int order;
  double t;
  double value;      // (-1)^n * centered difference quotient
  double tolerance;
};

struct CmReport {
  bool passed = true;
  std::vector<CmViolation> violations;
};

/// Sampled finite-difference test of (-1)^n D^n f >= 0 for n = 0..max_order
/// at each grid point, with h = t/100.  A numerical screen, not a proof.
inline CmReport cm_check(const std::function<double(double)>& f, int max_order,
                         const std::vector<double>& grid) {
  if (max_order < 0 || max_order > 4)
    throw std::invalid_argument("cm_check: max_order must lie in [0, 4]");
  if (grid.size() < 16)
    throw std::invalid_argument("cm_check: grid must have at least 16 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0))
      throw std::invalid_argument("cm_check: grid must be strictly positive");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("cm_check: grid must be strictly increasing");
  }
  static const double kBinom[5][5] = {{1, 0, 0, 0, 0},
                                      {1, -1, 0, 0, 0},
                                      {1, -2, 1, 0, 0},
                                      {1, -3, 3, -1, 0},
                                      {1, -4, 6, -4, 1}};
  const double eps = std::numeric_limits<double>::epsilon();
  CmReport report;
  for (double t : grid) {
    const double h = t / 100.0;
    const double gt = f(t);
    for (int n = 0; n <= max_order; ++n) {
      double diff = 0.0;
      for (int i = 0; i <= n; ++i) diff += kBinom[n][i] * f(t + (0.5 * n - i) * h);
      const double dn = diff / std::pow(h, n);
      const double signed_dn = (n % 2 == 0) ? dn : -dn;
      const double tol = std::max(1.0, std::abs(gt)) *
                         (1e-6 + 64.0 * std::pow(2.0, n) * eps / std::pow(h, n));
      if (signed_dn < -tol) {
        report.passed = false;
        report.violations.push_back({n, t, signed_dn, tol});
      }
    }
  }
  return report;
}

inline CmReport cm_check(const RelaxationKernel& kernel, int max_order,
                         const std::vector<double>& grid) {
  return cm_check([&](double t) { return eval_g(kernel, t); }, max_order, grid);
}

// ---------------------------------------------------------------------------
// Structure queries used by the duality / dispersion modules
// ---------------------------------------------------------------------------

/// Largest power-law exponent among the kernel's components (the dominant
/// t -> 0 singularity of G), if any.
inline std::optional<double> strongest_power_law_exponent(const RelaxationKernel& k) {
  if (k.is<PowerLaw>()) return k.as<PowerLaw>().exponent;
  if (k.is<SumKernel>()) {
    std::optional<double> best;
    for (const auto& part : k.as<SumKernel>().parts)
      if (auto a = strongest_power_law_exponent(part))
        best = best ? std::max(*best, *a) : *a;
    return best;
  }
  return std::nullopt;
}

/// Exponent a of the dominant G'(t) ~ -A t^-a singularity for bounded
/// kernels (stretched exponential: a = 1 - alpha_k).  Empty for kernels with
/// smooth G' (Prony, zero).
inline std::optional<double> gprime_singularity_exponent(const RelaxationKernel& k) {
  if (k.is<StretchedExponential>()) return 1.0 - k.as<StretchedExponential>().exponent;
  if (k.is<SumKernel>()) {
    std::optional<double> best;
    for (const auto& part : k.as<SumKernel>().parts)
      if (auto a = gprime_singularity_exponent(part))
        best = best ? std::max(*best, *a) : *a;
    return best;
  }
  return std::nullopt;
}

}  // namespace viscowave
