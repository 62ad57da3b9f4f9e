#pragma once

// Creep compliance from a material model, two independent ways: inversion of
// the transform-domain duality relation [N p + p G~(p)] p C~(p) = 1, and a
// direct time-domain Volterra solve of N C + G * C = t with product
// integration.  Their agreement is the toolkit's primary internal oracle.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "viscowave/common.hpp"
#include "viscowave/kernels.hpp"
#include "viscowave/laplace_inversion.hpp"
#include "viscowave/numerics.hpp"

namespace viscowave {

// ---------------------------------------------------------------------------
// CreepCurve
// ---------------------------------------------------------------------------

struct CreepCurve {
  std::vector<double> t;       // strictly increasing, positive
  std::vector<double> C;       // compliance, non-negative, non-decreasing
  std::vector<double> C_rate;  // derivative, non-negative, non-increasing
  double c0 = 0.0;             // C(0) limit
  ExtendedReal c_rate0 = ExtendedReal::finite(0.0);  // C'(0) limit
};

/// Bernstein-shape validation: C non-decreasing and concave, C' LICM-shaped.
inline void validate_creep_curve(const CreepCurve& curve, double rel_tol = 1e-7) {
  const std::size_t n = curve.t.size();
  if (n < 2 || curve.C.size() != n || curve.C_rate.size() != n)
    throw std::invalid_argument("creep curve: t, C, C_rate must share a size >= 2");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(curve.t[i] > 0.0))
      throw std::invalid_argument("creep curve: times must be positive");
    if (i > 0 && !(curve.t[i] > curve.t[i - 1]))
      throw std::invalid_argument("creep curve: times must be strictly increasing");
  }
  const double c_scale = std::max(std::abs(curve.C.back()), 1e-300);
  const double r_scale = std::max(std::abs(curve.C_rate.front()), 1e-300);
  for (std::size_t i = 0; i < n; ++i) {
    if (curve.C[i] < -rel_tol * c_scale)
      throw std::invalid_argument("creep curve: C must be non-negative");
    if (curve.C_rate[i] < -rel_tol * r_scale)
      throw std::invalid_argument("creep curve: C_rate must be non-negative");
    if (i > 0) {
      if (curve.C[i] < curve.C[i - 1] - rel_tol * c_scale)
        throw std::invalid_argument("creep curve: C must be non-decreasing");
      if (curve.C_rate[i] > curve.C_rate[i - 1] + rel_tol * r_scale)
        throw std::invalid_argument("creep curve: C_rate must be non-increasing");
    }
  }
  // concavity via second divided differences
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double dl = (curve.C[i] - curve.C[i - 1]) / (curve.t[i] - curve.t[i - 1]);
    const double dr = (curve.C[i + 1] - curve.C[i]) / (curve.t[i + 1] - curve.t[i]);
    if (dr > dl + rel_tol * std::max(1.0, std::abs(dl)) + rel_tol * c_scale)
      throw std::invalid_argument("creep curve: C must be concave (Bernstein class)");
  }
}

// ---------------------------------------------------------------------------
// Tauberian limits C(0), C'(0)
// ---------------------------------------------------------------------------

namespace detail {

inline double q_real(const MaterialModel& model, double p) {
  return q_function(model, Complex(p, 0.0)).real();
}

struct LimitSequence {
  std::vector<double> p;
  std::vector<double> s;
};

inline LimitSequence limit_grid(const MaterialModel& model, int n = 33,
                                double p_lo = 1e4, double p_hi = 1e8) {
  LimitSequence seq;
  seq.p.resize(n);
  seq.s.resize(n);
  for (int i = 0; i < n; ++i)
    seq.p[i] = p_lo * std::pow(p_hi / p_lo, double(i) / double(n - 1));
  return seq;
}

}  // namespace detail

/// c0 = lim 1/Q(p) and c'(0) = lim p (1/Q(p) - c0) for p -> infinity, by
/// geometric-grid extrapolation.  Returns +infinity for the rate when the
/// scaled sequence grows without bound; throws IndeterminateLimit otherwise.
inline std::pair<double, ExtendedReal> limits_c0_cprime0(const MaterialModel& model) {
  auto seq = detail::limit_grid(model);
  const int n = int(seq.p.size());
  for (int i = 0; i < n; ++i) seq.s[i] = 1.0 / detail::q_real(model, seq.p[i]);

  auto contracting = [](const std::vector<double>& v) {
    const int m = int(v.size());
    const double d1 = v[m - 2] - v[m - 3];
    const double d2 = v[m - 1] - v[m - 2];
    return std::abs(d1) > 0.0 && std::abs(d2 / d1) < 0.97 && d1 * d2 > 0.0;
  };

  double c0;
  const double s_first = std::max(std::abs(seq.s.front()), 1e-300);
  const double s_last = seq.s.back();
  const double d_rel = std::abs(seq.s[n - 1] - seq.s[n - 2]) / std::max(std::abs(s_last), 1e-300);
  if (d_rel < 1e-4 || contracting(seq.s)) {
    c0 = std::max(0.0, numerics::aitken_limit(seq.s));
  } else {
    bool decreasing = true;
    for (int i = 0; i + 1 < n; ++i)
      if (seq.s[i + 1] > seq.s[i] * (1.0 + 1e-12)) decreasing = false;
    if (decreasing && std::abs(s_last) < 0.5 * s_first)
      c0 = 0.0;  // 1/Q decays to zero without settling: no compliance jump
    else
      throw IndeterminateLimit("limits_c0_cprime0: 1/Q(p) did not classify");
  }
  if (c0 < 1e-13 * s_first) c0 = 0.0;

  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = seq.p[i] * (seq.s[i] - c0);
  const double w_scale = std::max(std::abs(w.back()), 1e-300);
  const double wd_rel = std::abs(w[n - 1] - w[n - 2]) / w_scale;
  if (wd_rel < 1e-4 || contracting(w))
    return {c0, ExtendedReal::finite(std::max(0.0, numerics::aitken_limit(w)))};
  const int per_decade = (n - 1) / 4;
  bool growing = true;
  for (int i = n - 1 - per_decade; i < n - 1; ++i)
    if (w[i + 1] < w[i]) growing = false;
  if (growing && w[n - 1] > 1.1 * std::max(w[n - 1 - per_decade], 1e-300))
    return {c0, ExtendedReal::infinity()};
  throw IndeterminateLimit("limits_c0_cprime0: p (1/Q - c0) did not classify");
}

// ---------------------------------------------------------------------------
// Transform construction per kernel structure
// ---------------------------------------------------------------------------

namespace detail {

struct FlatKernel {
  std::vector<PronyTerm> prony;
  std::vector<PowerLaw> powers;
  std::vector<StretchedExponential> stretched;
};

inline void flatten_into(const RelaxationKernel& k, FlatKernel& out) {
  if (k.is<ZeroKernel>()) return;
  if (k.is<PronySeries>()) {
    for (const auto& t : k.as<PronySeries>().terms) out.prony.push_back(t);
    return;
  }
  if (k.is<PowerLaw>()) {
    out.powers.push_back(k.as<PowerLaw>());
    return;
  }
  if (k.is<StretchedExponential>()) {
    out.stretched.push_back(k.as<StretchedExponential>());
    return;
  }
  for (const auto& part : k.as<SumKernel>().parts) flatten_into(part, out);
}

inline FlatKernel flatten(const RelaxationKernel& k) {
  FlatKernel f;
  flatten_into(k, f);
  return f;
}

/// Rational form of C~ = Dg/(p Pq) and C~' = (Dg - c0 Pq)/Pq for Prony-type
/// kernels, where G~ = Pg/Dg and Pq = N p Dg + p Pg.
struct PronyRational {
  Rational C;
  Rational C_rate;
};

inline PronyRational prony_rational(const MaterialModel& model,
                                    const std::vector<PronyTerm>& terms, double c0) {
  using numerics::Poly;
  Poly Dg{1.0};
  for (const auto& t : terms) Dg = numerics::poly_mul(Dg, Poly{t.rate, 1.0});
  Poly Pg{0.0};
  for (std::size_t i = 0; i < terms.size(); ++i) {
    Poly prod{terms[i].modulus};
    for (std::size_t j = 0; j < terms.size(); ++j)
      if (j != i) prod = numerics::poly_mul(prod, Poly{terms[j].rate, 1.0});
    Pg = numerics::poly_add(Pg, prod);
  }
  const Poly p_poly{0.0, 1.0};
  Poly Pq = numerics::poly_add(numerics::poly_mul(numerics::poly_scale(p_poly, model.newtonian), Dg),
                               numerics::poly_mul(p_poly, Pg));
  PronyRational r;
  r.C.num = Dg;
  r.C.den = numerics::poly_mul(p_poly, Pq);
  r.C_rate.num = numerics::poly_add(Dg, numerics::poly_scale(Pq, -c0));
  r.C_rate.den = Pq;
  return r;
}

inline std::vector<Complex> clamped_roots(const numerics::Poly& den) {
  auto roots = numerics::poly_roots(den);
  for (auto& z : roots)
    if (z.real() > 0.0 && z.real() < 1e-9 * (1.0 + std::abs(z)))
      z = Complex(0.0, z.imag());
  return roots;
}

}  // namespace detail

struct CreepTransforms {
  TransformFunction C;       // C~(p) = 1/(p Q(p))
  TransformFunction C_rate;  // C~'(p) = 1/Q(p) - c0
  double c0;
  ExtendedReal c_rate0 = ExtendedReal::finite(0.0);
};

/// Build the creep transforms with per-family analyticity metadata: rational
/// (residue path) for Prony-type kernels, branch-cut boundary values for pure
/// power-law kernels, plain cut-plane evaluation (Talbot path) otherwise.
inline CreepTransforms creep_transforms(const MaterialModel& model) {
  auto [c0, c_rate0] = limits_c0_cprime0(model);
  const auto flat = detail::flatten(model.kernel);
  CreepTransforms out{TransformFunction{}, TransformFunction{}, c0, c_rate0};

  auto eval_C = [model](Complex p) { return 1.0 / (p * q_function(model, p)); };
  auto eval_Crate = [model, c0copy = c0](Complex p) {
    return 1.0 / q_function(model, p) - c0copy;
  };

  if (flat.powers.empty() && flat.stretched.empty()) {
    auto rat = detail::prony_rational(model, flat.prony, c0);
    out.C = TransformFunction::meromorphic(eval_C, detail::clamped_roots(rat.C.den),
                                           rat.C);
    out.C_rate = TransformFunction::meromorphic(
        eval_Crate, detail::clamped_roots(rat.C_rate.den), rat.C_rate);
    return out;
  }
  if (flat.prony.empty() && flat.stretched.empty()) {
    // pure power laws: Q continues below the cut in closed form
    const double N = model.newtonian;
    auto powers = flat.powers;
    auto boundary = [N, powers, c0copy = c0](double r) -> Complex {
      // Q(r e^{-i pi}) = -N r + sum A r^alpha e^{-i pi alpha}
      Complex q = -N * r;
      for (const auto& pw : powers)
        q += pw.amplitude * std::pow(r, pw.exponent) *
             std::polar(1.0, -M_PI * pw.exponent);
      return 1.0 / q - c0copy;
    };
    out.C = TransformFunction::cut_plane(eval_C);  // |C~| >> 1/p at 0: Talbot
    out.C_rate = TransformFunction::cut_plane(eval_Crate, boundary);
    return out;
  }
  out.C = TransformFunction::cut_plane(eval_C);
  out.C_rate = TransformFunction::cut_plane(eval_Crate);
  return out;
}

/// Creep compliance and its rate on t_grid via transform inversion.
inline CreepCurve creep_from_model(const MaterialModel& model,
                                   const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("creep_from_model: empty grid");
  auto tf = creep_transforms(model);
  CreepCurve curve;
  curve.t = t_grid;
  curve.c0 = tf.c0;
  curve.c_rate0 = tf.c_rate0;
  curve.C.resize(t_grid.size());
  curve.C_rate.resize(t_grid.size());
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t > 0.0))
      throw std::invalid_argument("creep_from_model: grid times must be positive");
    try {
      curve.C[i] = invert_auto(tf.C, t).value;
      curve.C_rate[i] = invert_auto(tf.C_rate, t).value;
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (at t = " + std::to_string(t) + ")");
    }
  }
  validate_creep_curve(curve);
  return curve;
}

// ---------------------------------------------------------------------------
// Product-integration machinery shared by the Volterra solver and the
// duality-residual evaluator
// ---------------------------------------------------------------------------

namespace detail {

inline double phi1_series(double x) {
  // (1 - (1+x) e^{-x})/x^2 = sum_{k>=0} (-x)^k (k+1)/(k+2)!, stable near 0
  if (x < 1e-2) {
    double sum = 0.0, mxk = 1.0, fact = 2.0;
    for (int k = 0; k <= 10; ++k) {
      sum += mxk * double(k + 1) / fact;
      mxk *= -x;
      fact *= double(k + 3);
    }
    return sum;
  }
  return (1.0 - (1.0 + x) * std::exp(-x)) / (x * x);
}

/// m0 = int_a^b G(s) ds in closed form where available.
inline double kernel_m0(const RelaxationKernel& k, double a, double b);
/// m1 = int_a^b G(s) (s - a) ds.
inline double kernel_m1(const RelaxationKernel& k, double a, double b);

inline double power_diff(double a, double b, double beta) {
  // b^beta - a^beta without cancellation for b-a << a
  if (a <= 0.0) return std::pow(b, beta);
  return std::pow(a, beta) * std::expm1(beta * std::log1p((b - a) / a));
}

inline double kernel_m0(const RelaxationKernel& k, double a, double b) {
  if (k.is<ZeroKernel>()) return 0.0;
  if (k.is<PronySeries>()) {
    double s = 0.0;
    for (const auto& t : k.as<PronySeries>().terms) {
      if (t.rate == 0.0)
        s += t.modulus * (b - a);
      else
        s += t.modulus * std::exp(-t.rate * a) * (-std::expm1(-t.rate * (b - a))) / t.rate;
    }
    return s;
  }
  if (k.is<PowerLaw>()) {
    const auto& pw = k.as<PowerLaw>();
    const double beta = 1.0 - pw.exponent;
    return pw.amplitude * power_diff(a, b, beta) / (beta * std::tgamma(1.0 - pw.exponent));
  }
  if (k.is<StretchedExponential>()) {
    return numerics::adaptive_gk<double>([&](double s) { return eval_g(k, s); }, a, b,
                                         1e-12)
        .value;
  }
  double s = 0.0;
  for (const auto& part : k.as<SumKernel>().parts) s += kernel_m0(part, a, b);
  return s;
}

inline double kernel_m1(const RelaxationKernel& k, double a, double b) {
  if (k.is<ZeroKernel>()) return 0.0;
  if (k.is<PronySeries>()) {
    double s = 0.0;
    const double h = b - a;
    for (const auto& t : k.as<PronySeries>().terms) {
      if (t.rate == 0.0)
        s += t.modulus * 0.5 * h * h;
      else
        s += t.modulus * std::exp(-t.rate * a) * h * h * phi1_series(t.rate * h);
    }
    return s;
  }
  if (k.is<PowerLaw>()) {
    const auto& pw = k.as<PowerLaw>();
    const double al = pw.exponent;
    const double t2 = power_diff(a, b, 2.0 - al) / (2.0 - al);
    const double t1 = a * power_diff(a, b, 1.0 - al) / (1.0 - al);
    return pw.amplitude * (t2 - t1) / std::tgamma(1.0 - al);
  }
  if (k.is<StretchedExponential>()) {
    return numerics::adaptive_gk<double>(
               [&](double s) { return eval_g(k, s) * (s - a); }, a, b, 1e-12)
        .value;
  }
  double s = 0.0;
  for (const auto& part : k.as<SumKernel>().parts) s += kernel_m1(part, a, b);
  return s;
}

/// int_{b-h}^{b} G(s) ((b-s)/h)^theta ds -- the graded last-cell weight.
inline double kernel_graded_weight(const RelaxationKernel& k, double b, double h,
                                   double theta) {
  if (theta == 1.0) return kernel_m0(k, b - h, b) - kernel_m1(k, b - h, b) / h;
  if (k.is<SumKernel>()) {
    double s = 0.0;
    for (const auto& part : k.as<SumKernel>().parts)
      s += kernel_graded_weight(part, b, h, theta);
    return s;
  }
  if (k.is<PowerLaw>() && b <= h * (1.0 + 1e-12)) {
    // exact Beta-function moment against the t^-alpha singularity
    const auto& pw = k.as<PowerLaw>();
    const double al = pw.exponent;
    const double lb = std::lgamma(1.0 - al) + std::lgamma(1.0 + theta) -
                      std::lgamma(2.0 - al + theta);
    return pw.amplitude / std::tgamma(1.0 - al) * std::pow(h, 1.0 - al) * std::exp(lb);
  }
  if (k.is<ZeroKernel>()) return 0.0;
  return numerics::adaptive_gk<double>(
             [&](double u) {
               return u <= 0.0 ? 0.0 : eval_g(k, b - u) * std::pow(u / h, theta);
             },
             0.0, h, 1e-12)
      .value;
}

/// Grading exponent of C near t = 0: C(t) ~ c0 + const * t^theta.
inline double grading_exponent(const MaterialModel& model) {
  if (model.newtonian > 0.0) return 1.0;
  if (auto a = strongest_power_law_exponent(model.kernel)) return *a;
  if (auto a = gprime_singularity_exponent(model.kernel)) return 1.0 - *a;
  return 1.0;
}

struct ProductWeights {
  std::vector<double> m0, wl, wr;  // per s-cell [kh, (k+1)h]
  std::vector<double> graded;      // graded last-cell weight per node j (1-based)
  double diag;                     // weight of the unknown C_j (k = 0 cell)
};

inline ProductWeights product_weights(const RelaxationKernel& kernel, int n, double h,
                                      double theta) {
  ProductWeights w;
  w.m0.resize(n);
  w.wl.resize(n);
  w.wr.resize(n);
  w.graded.resize(n + 1);
  for (int k = 0; k < n; ++k) {
    const double a = k * h, b = (k + 1) * h;
    w.m0[k] = kernel_m0(kernel, a, b);
    const double m1 = kernel_m1(kernel, a, b);
    w.wl[k] = w.m0[k] - m1 / h;
    w.wr[k] = m1 / h;
  }
  for (int j = 1; j <= n; ++j)
    w.graded[j] = kernel_graded_weight(kernel, j * h, h, theta);
  w.diag = w.wl[0];
  return w;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Volterra solver
// ---------------------------------------------------------------------------

struct VolterraOptions {
  int head_cells = -1;   // fine-start extent in coarse cells (-1: by family)
  int head_refine = -1;  // fine substeps per coarse cell (-1: by family)
};

namespace detail {

/// Mixing fraction for the two-term first-cell shape
/// C(u) ~ c0 + a (u/h)^theta + b (u/h), fitted through the first two nodes.
/// The last-cell weight becomes (1-lambda) W_theta + lambda W_linear with
/// lambda = b/(a+b), which represents both the leading cusp and the next
/// regular term of the compliance.
inline double shape_mix(double c0, double C1, double C2, double theta) {
  const double d1 = C1 - c0, d2 = C2 - c0;
  const double denom = 2.0 - std::pow(2.0, theta);
  if (std::abs(denom) < 1e-12 || std::abs(d1) < 1e-300) return 0.0;
  const double a = (2.0 * d1 - d2) / denom;
  const double lambda = (d1 - a) / d1;
  return std::clamp(lambda, -2.0, 2.0);
}

/// Step-by-step product-integration solve on nodes h..n h; C has n+1 entries
/// including C[0] = c0.  For graded starts (theta < 1) the first-cell shape
/// mix is iterated to its fixed point.
inline std::vector<double> volterra_uniform(const MaterialModel& model, int n, double h,
                                            double c0, double theta) {
  const double N = model.newtonian;
  auto w = product_weights(model.kernel, n, h, theta);
  if (N + std::min(w.diag, w.graded[1]) <= 1e-12 * (1.0 + w.m0[0]))
    throw NumericalError(
        "volterra_solve_creep: first-kind discretization ill-conditioned "
        "(condition estimate above 1e12); use the transform path");
  std::vector<double> C(std::size_t(n) + 1);
  auto sweep = [&](double lambda) {
    auto wg = [&](int j) {
      return (1.0 - lambda) * w.graded[j] + lambda * w.wl[j - 1];
    };
    C[0] = c0;
    C[1] = (h - c0 * w.m0[0] + c0 * wg(1)) / (N + wg(1));
    for (int j = 2; j <= n; ++j) {
      double acc = c0 * w.m0[j - 1] + (C[1] - c0) * wg(j) + w.wr[0] * C[j - 1];
      for (int k = 1; k <= j - 2; ++k)
        acc += w.wl[k] * C[j - k] + w.wr[k] * C[j - k - 1];
      C[j] = (j * h - acc) / (N + w.diag);
    }
  };
  sweep(0.0);
  if (theta < 1.0 && n >= 2) {
    for (int iter = 0; iter < 3; ++iter)
      sweep(shape_mix(c0, C[1], C[2], theta));
  }
  return C;
}

}  // namespace detail

/// Time-domain creep solve on a uniform grid t_k = k h (k = 1..n): second
/// kind when N > 0, first kind (product integration against the kernel
/// singularity) when N = 0.  Singular kernels get a refined starting head.
inline CreepCurve volterra_solve_creep(const MaterialModel& model,
                                       const std::vector<double>& t_grid,
                                       VolterraOptions opts = {}) {
  const int n = int(t_grid.size());
  if (n < 2) throw std::invalid_argument("volterra_solve_creep: need at least 2 nodes");
  const double h = t_grid[0];
  if (!(h > 0.0))
    throw std::invalid_argument("volterra_solve_creep: grid times must be positive");
  for (int i = 0; i < n; ++i)
    if (std::abs(t_grid[i] - (i + 1) * h) > 1e-8 * (i + 1) * h)
      throw std::invalid_argument(
          "volterra_solve_creep: grid must be uniform with t_k = k h");
  if (model.newtonian == 0.0 && model.kernel.is_zero())
    throw std::invalid_argument(
        "volterra_solve_creep: N = 0 with a zero kernel gives no equation");

  double c0 = 0.0;
  if (model.newtonian == 0.0) {
    const ExtendedReal g0 = g0_closed_form(model.kernel);
    c0 = g0.is_infinite() ? 0.0 : 1.0 / g0.value();
  }
  const double theta = detail::grading_exponent(model);

  int M = opts.head_cells, R = opts.head_refine;
  if (M < 0 || R < 0) {
    const bool singular_kernel = strongest_power_law_exponent(model.kernel) ||
                                 gprime_singularity_exponent(model.kernel);
    if (model.newtonian == 0.0 && theta < 1.0) {
      const bool strongly_singular = g0_closed_form(model.kernel).is_infinite();
      M = strongly_singular ? 128 : 64;
      R = strongly_singular ? 128 : 64;
    } else if (singular_kernel) {
      // N > 0 with a singular kernel: C'' ~ t^-alpha still needs a fine start
      M = 64;
      R = 64;
    } else {
      M = 0;
      R = 1;
    }
  }

  std::vector<double> C;
  if (M == 0 || n <= M) {
    if (M > 0 && n <= M) {
      // grid shorter than the head: solve entirely on the fine grid
      auto Cf = detail::volterra_uniform(model, n * R, h / R, c0, theta);
      C.resize(std::size_t(n) + 1);
      C[0] = c0;
      for (int j = 1; j <= n; ++j) C[j] = Cf[std::size_t(j) * R];
    } else {
      C = detail::volterra_uniform(model, n, h, c0, theta);
    }
  } else {
    const double hf = h / R;
    const int nf = M * R;
    auto Cf = detail::volterra_uniform(model, nf, hf, c0, theta);
    auto w = detail::product_weights(model.kernel, n, h, theta);
    // fine moments over s in [0, n h] for the head-history convolution
    const long long nfine_total = 1LL * n * R;
    std::vector<double> m0f(nfine_total), wlf(nfine_total), wrf(nfine_total);
    for (long long l = 0; l < nfine_total; ++l) {
      const double a = l * hf, b = (l + 1) * hf;
      m0f[l] = detail::kernel_m0(model.kernel, a, b);
      const double m1 = detail::kernel_m1(model.kernel, a, b);
      wlf[l] = m0f[l] - m1 / hf;
      wrf[l] = m1 / hf;
    }
    const double lambda_f =
        (theta < 1.0) ? detail::shape_mix(c0, Cf[1], Cf[2], theta) : 0.0;
    C.assign(std::size_t(n) + 1, 0.0);
    C[0] = c0;
    for (int j = 1; j <= M; ++j) C[j] = Cf[std::size_t(j) * R];
    for (int j = M + 1; j <= n; ++j) {
      double acc = w.wr[0] * C[j - 1];
      for (int k = 1; k <= j - M - 1; ++k)
        acc += w.wl[k] * C[j - k] + w.wr[k] * C[j - k - 1];
      // fine history: s-cells covering u = t_j - s in [0, M h]
      const long long base = 1LL * j * R;
      for (int l = nf - 1; l >= 1; --l) {
        const long long sc = base - l - 1;
        acc += Cf[std::size_t(l) + 1] * wlf[sc] + Cf[l] * wrf[sc];
      }
      // first fine u-cell with the fitted two-term shape
      acc += c0 * m0f[base - 1];
      double wg = wlf[base - 1];
      if (theta < 1.0)
        wg = (1.0 - lambda_f) *
                 detail::kernel_graded_weight(model.kernel, j * h, hf, theta) +
             lambda_f * wlf[base - 1];
      acc += (Cf[1] - c0) * wg;
      C[j] = (j * h - acc) / (model.newtonian + w.diag);
    }
  }

  CreepCurve curve;
  curve.t = t_grid;
  curve.c0 = c0;
  curve.C.assign(C.begin() + 1, C.end());
  curve.C_rate.resize(n);
  // rate by centered differences on the solved compliance (one-sided ends)
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      curve.C_rate[i] = (C[2] + 3.0 * c0 - 4.0 * C[1]) / (-2.0 * h);
    else if (i == n - 1)
      curve.C_rate[i] = (3.0 * C[n] - 4.0 * C[n - 1] + C[n - 2]) / (2.0 * h);
    else
      curve.C_rate[i] = (C[i + 2] - C[i]) / (2.0 * h);
  }
  auto [lc0, lrate0] = limits_c0_cprime0(model);
  (void)lc0;
  curve.c_rate0 = lrate0;
  return curve;
}

/// max_j | N C(t_j) + (G*C)(t_j) - t_j | over the curve's uniform grid, using
/// the same product-integration weights as the solver.
inline double duality_residual(const MaterialModel& model, const CreepCurve& curve) {
  const int n = int(curve.t.size());
  if (n < 2) throw std::invalid_argument("duality_residual: need at least 2 nodes");
  const double h = curve.t[0];
  for (int i = 0; i < n; ++i)
    if (std::abs(curve.t[i] - (i + 1) * h) > 1e-8 * (i + 1) * h)
      throw std::invalid_argument("duality_residual: curve grid must be uniform");
  if (curve.C.size() != std::size_t(n))
    throw std::invalid_argument("duality_residual: grid mismatch");
  const double theta = detail::grading_exponent(model);
  auto w = detail::product_weights(model.kernel, n, h, theta);
  const double N = model.newtonian;
  const double c0 = curve.c0;
  const double lambda =
      (theta < 1.0) ? detail::shape_mix(c0, curve.C[0], curve.C[1], theta) : 0.0;
  double worst = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double wg = (1.0 - lambda) * w.graded[j] + lambda * w.wl[j - 1];
    double acc = c0 * w.m0[j - 1] + (curve.C[0] - c0) * wg;
    for (int k = 0; k <= j - 2; ++k)
      acc += w.wl[k] * curve.C[std::size_t(j - k - 1)] +
             w.wr[k] * (j - k - 2 >= 0 ? curve.C[std::size_t(j - k - 2)] : c0);
    worst = std::max(worst, std::abs(N * curve.C[std::size_t(j - 1)] + acc - j * h));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Newtonian coefficient from creep data
// ---------------------------------------------------------------------------

enum class CreepRegimeFlag { NewtonianPresent, JumpCompliance, InfiniteInitialSlope };

inline const char* to_string(CreepRegimeFlag f) {
  switch (f) {
    case CreepRegimeFlag::NewtonianPresent: return "Newtonian present";
    case CreepRegimeFlag::JumpCompliance: return "jump compliance";
    case CreepRegimeFlag::InfiniteInitialSlope: return "infinite initial slope";
  }
  return "?";
}

struct NewtonianEstimate {
  double newtonian = 0.0;  // N estimate; 0 for the non-Newtonian rows
  CreepRegimeFlag flag = CreepRegimeFlag::NewtonianPresent;
  double c_rate0 = 0.0;  // extrapolated C'(0) when finite
};

/// Estimate N = 1/C'(0) from a sampled creep curve, or classify the curve as
/// jump-compliance / infinite-initial-slope.  The short-time grid should be
/// roughly geometric (successive halvings) for the slope extrapolation.
inline NewtonianEstimate newtonian_from_creep(const CreepCurve& curve,
                                              double tol_c0 = -1.0) {
  validate_creep_curve(curve);
  const std::size_t n = curve.t.size();
  if (n < 8 || curve.t.front() > 0.01 * curve.t.back())
    throw std::invalid_argument(
        "newtonian_from_creep: need >= 8 points with the smallest time <= 1% of span");
  if (tol_c0 < 0.0) tol_c0 = 1e-6 * std::max(curve.C.back(), 1e-300);
  if (curve.c0 > tol_c0)
    return {0.0, CreepRegimeFlag::JumpCompliance, 0.0};

  // slope sequence on a near-geometric descending-time head
  std::vector<double> s;
  std::size_t count = std::min<std::size_t>(n, 9);
  for (std::size_t i = count; i-- > 0;)
    s.push_back((curve.C[i] - curve.c0) / curve.t[i]);  // descending t
  // s is now ordered from larger t to smaller t; C'(0) is its limit
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) d.push_back(s[i + 1] - s[i]);
  double dmax = 0.0;
  for (double v : d) dmax = std::max(dmax, std::abs(v));
  const double s_scale = std::max(std::abs(s.back()), 1e-300);
  if (dmax < 1e-9 * s_scale)
    return {s.back() > 0.0 ? 1.0 / s.back() : 0.0, CreepRegimeFlag::NewtonianPresent,
            s.back()};
  // divergence: increments that do not shrink while the slope keeps growing
  int non_shrinking = 0;
  bool growing = true;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    if (std::abs(d[i + 1]) >= 0.98 * std::abs(d[i])) ++non_shrinking;
    if (s[i + 1] < s[i]) growing = false;
  }
  if (growing && non_shrinking >= int(d.size() - 1) / 2 + 1)
    return {0.0, CreepRegimeFlag::InfiniteInitialSlope, 0.0};
  const double s_inf = numerics::aitken_limit(s);
  if (!(s_inf > 0.0))
    throw NumericalError("newtonian_from_creep: slope extrapolation failed");
  return {1.0 / s_inf, CreepRegimeFlag::NewtonianPresent, s_inf};
}

}  // namespace viscowave
