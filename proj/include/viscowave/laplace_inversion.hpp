#pragma once

// Numerical inverse Laplace transform engine.  Three strategies:
//  - fixed-Talbot contour quadrature (Abate-Valko) for smooth transforms,
//  - branch-cut contour deformation for transforms analytic off ]-inf, 0],
//  - exact residue summation for low-degree rational transforms.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "viscowave/common.hpp"
#include "viscowave/numerics.hpp"

namespace viscowave {

enum class Analyticity {
  CutPlane,     // analytic on C \ ]-inf, 0]
  Meromorphic,  // isolated poles, all with Re p <= 0
};

struct Rational {
  numerics::Poly num;
  numerics::Poly den;
};

/// An evaluable Laplace transform F(p) with declared analyticity metadata.
/// For CutPlane transforms, `boundary_below` (the limit of F at p = r e^{-i pi},
/// r > 0) enables the branch-cut inversion path when it is available in
/// closed form.
struct TransformFunction {
  std::function<Complex(Complex)> eval;
  Analyticity analyticity = Analyticity::CutPlane;
  std::vector<Complex> poles;                     // Meromorphic only
  std::optional<Rational> rational;               // exact P/Q form when known
  std::function<Complex(double)> boundary_below;  // CutPlane only, optional

  static TransformFunction cut_plane(std::function<Complex(Complex)> eval,
                                     std::function<Complex(double)> boundary = nullptr) {
    TransformFunction f;
    f.eval = std::move(eval);
    f.analyticity = Analyticity::CutPlane;
    f.boundary_below = std::move(boundary);
    return f;
  }

  static TransformFunction meromorphic(std::function<Complex(Complex)> eval,
                                       std::vector<Complex> poles,
                                       std::optional<Rational> rational = std::nullopt) {
    for (const auto& p : poles)
      if (p.real() > 1e-12)
        throw std::invalid_argument(
            "TransformFunction: declared poles must satisfy Re p <= 0");
    TransformFunction f;
    f.eval = std::move(eval);
    f.analyticity = Analyticity::Meromorphic;
    f.poles = std::move(poles);
    f.rational = std::move(rational);
    return f;
  }
};

// ---------------------------------------------------------------------------
// Fixed Talbot
// ---------------------------------------------------------------------------

/// Fixed-Talbot quadrature of the Bromwich integral (contour r = 2M/(5t)).
/// Accumulation runs in extended precision; in double precision the practical
/// floor is set by e^{2M/5} * eps, so moderate M beats large M.
inline double invert_talbot(const TransformFunction& F, double t, int M = 32) {
  if (!(t > 0.0)) throw std::domain_error("invert_talbot: t must be > 0");
  if (M < 16 || M > 128 || M % 2 != 0)
    throw std::invalid_argument("invert_talbot: M must be even and in [16, 128]");
  const double r = 2.0 * M / (5.0 * t);
  using CL = std::complex<long double>;
  const Complex f0 = F.eval(Complex(r, 0.0));
  if (!std::isfinite(std::abs(f0)))
    throw NumericalError("invert_talbot: non-finite F at contour node p = " +
                         std::to_string(r));
  CL acc = 0.5L * CL(f0) * std::exp(CL(r * t, 0.0L));
  for (int k = 1; k < M; ++k) {
    const double theta = k * M_PI / M;
    const double cot = std::cos(theta) / std::sin(theta);
    const Complex s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    const Complex fs = F.eval(s);
    if (!std::isfinite(std::abs(fs)))
      throw NumericalError("invert_talbot: non-finite F at contour node p = (" +
                           std::to_string(s.real()) + ", " + std::to_string(s.imag()) +
                           ")");
    acc += std::exp(CL(s) * (long double)t) * CL(fs) * CL(1.0L, (long double)sigma);
  }
  return double((long double)(r) / M * acc.real());
}

// ---------------------------------------------------------------------------
// Branch-cut contour
// ---------------------------------------------------------------------------

/// f(t) = (1/pi) Im int_0^inf e^{-rt} F(r e^{-i pi}) dr, for transforms
/// analytic off the negative real axis with |F(p)| = o(1/|p|) at 0.
/// Quadrature splits at r = 1 with the substitution r = e^u on both sides.
inline double invert_branchcut(const TransformFunction& F, double t,
                               double quad_tol = 1e-9) {
  if (!(t > 0.0)) throw std::domain_error("invert_branchcut: t must be > 0");
  auto below = [&](double r) -> Complex {
    if (F.boundary_below) return F.boundary_below(r);
    // principal-branch evaluators see arg p = -pi through the signed zero
    return F.eval(Complex(-r, -0.0));
  };
  auto g = [&](double u) -> double {
    const double r = std::exp(u);
    const Complex fb = below(r);
    if (!std::isfinite(std::abs(fb)))
      throw NumericalError("invert_branchcut: non-finite F on the cut at r = " +
                           std::to_string(r));
    return std::imag(fb) * std::exp(-r * t) * r;
  };
  double acc = 0.0;
  // right side: r in [1, inf), exponential decay from e^{-rt}
  {
    int quiet = 0;
    double prev = std::numeric_limits<double>::infinity();
    int rising = 0;
    for (int k = 0; k < 120; ++k) {
      const double v =
          numerics::adaptive_gk<double>(g, double(k), double(k + 1), quad_tol).value;
      acc += v;
      const double mag = std::abs(v);
      if (mag <= quad_tol * std::abs(acc) + 1e-300) {
        if (++quiet >= 2) break;
      } else {
        quiet = 0;
      }
      if (mag > prev && std::exp(double(k)) * t > 60.0)
        ++rising;
      else
        rising = 0;
      if (rising >= 4)
        throw NumericalError("invert_branchcut: non-decaying integrand for large r");
      prev = mag;
      if (k == 119)
        throw NumericalError("invert_branchcut: right tail did not converge");
    }
  }
  // left side: r in (0, 1]; integrand ~ Im F(-r) r must vanish as r -> 0
  {
    int quiet = 0;
    for (int k = 0; k < 160; ++k) {
      const double v =
          numerics::adaptive_gk<double>(g, double(-k - 1), double(-k), quad_tol).value;
      acc += v;
      if (std::abs(v) <= quad_tol * std::abs(acc) + 1e-300) {
        if (++quiet >= 2) break;
      } else {
        quiet = 0;
      }
      if (k == 159)
        throw NumericalError(
            "invert_branchcut: integrand does not vanish toward r = 0 "
            "(small-circle contribution would not be negligible)");
    }
  }
  return acc / M_PI;
}

// ---------------------------------------------------------------------------
// Residue summation for rational transforms
// ---------------------------------------------------------------------------

namespace detail {

inline Complex cpoly_eval(const std::vector<Complex>& c, Complex p) {
  Complex v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * p + c[i];
  return v;
}

/// Synthetic division of c by (p - s); remainder discarded.
inline std::vector<Complex> cpoly_deflate(const std::vector<Complex>& c, Complex s) {
  std::vector<Complex> q(c.size() - 1);
  Complex carry = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    q[i] = carry;
    carry = c[i] + carry * s;
  }
  return q;
}

inline std::vector<Complex> cpoly_derivative(const std::vector<Complex>& c) {
  if (c.size() <= 1) return {Complex(0.0, 0.0)};
  std::vector<Complex> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
  return d;
}

}  // namespace detail

/// Exact inversion of a rational transform by residues.  Poles of
/// multiplicity 1 and 2 are supported (clustered roots are merged); higher
/// multiplicities raise NumericalError.
inline double invert_rational(const Rational& R, double t) {
  std::vector<Complex> roots = numerics::poly_roots(R.den);
  if (roots.empty()) throw NumericalError("invert_rational: constant denominator");
  double scale = 0.0;
  for (const auto& z : roots) scale = std::max(scale, std::abs(z));
  const double cluster_tol = 1e-6 * std::max(1.0, scale);

  std::vector<Complex> dden(roots.size() + 1);
  std::vector<Complex> num(R.num.size());
  for (std::size_t i = 0; i < R.num.size(); ++i) num[i] = R.num[i];
  std::vector<Complex> den(R.den.size());
  for (std::size_t i = 0; i < R.den.size(); ++i) den[i] = R.den[i];

  std::vector<bool> used(roots.size(), false);
  Complex total(0.0, 0.0);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::size_t> cluster{i};
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (!used[j] && std::abs(roots[j] - roots[i]) < cluster_tol) cluster.push_back(j);
    Complex s(0.0, 0.0);
    for (auto j : cluster) {
      s += roots[j];
      used[j] = true;
    }
    s /= double(cluster.size());
    if (std::abs(s.imag()) < cluster_tol) s = Complex(s.real(), 0.0);
    if (s.real() > 1e-9 * std::max(1.0, scale))
      throw NumericalError("invert_rational: pole in the open right half-plane");
    const Complex est = std::exp(s * t);
    if (cluster.size() == 1) {
      const Complex dp = detail::cpoly_eval(detail::cpoly_derivative(den), s);
      if (std::abs(dp) < 1e-300) throw NumericalError("invert_rational: defective pole");
      total += est * detail::cpoly_eval(num, s) / dp;
    } else if (cluster.size() == 2) {
      // residue of e^{pt} num/(q (p-s)^2) at the double pole s
      auto q = detail::cpoly_deflate(detail::cpoly_deflate(den, s), s);
      const Complex qs = detail::cpoly_eval(q, s);
      const Complex qps = detail::cpoly_eval(detail::cpoly_derivative(q), s);
      const Complex ns = detail::cpoly_eval(num, s);
      const Complex nps = detail::cpoly_eval(detail::cpoly_derivative(num), s);
      if (std::abs(qs) < 1e-300) throw NumericalError("invert_rational: defective pole");
      total += est * (t * ns / qs + (nps * qs - ns * qps) / (qs * qs));
    } else {
      throw NumericalError("invert_rational: pole multiplicity above 2");
    }
  }
  if (std::abs(total.imag()) > 1e-10 * (std::abs(total.real()) + 1e-300) &&
      std::abs(total.imag()) > 1e-14)
    throw NumericalError("invert_rational: imaginary residue above tolerance");
  return total.real();
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

enum class InversionMethod { Talbot, BranchCut, Residues };

struct InversionResult {
  double value;
  InversionMethod method;
};

inline const char* to_string(InversionMethod m) {
  switch (m) {
    case InversionMethod::Talbot: return "talbot";
    case InversionMethod::BranchCut: return "branch-cut";
    case InversionMethod::Residues: return "residues";
  }
  return "?";
}

/// Dispatch on analyticity metadata: rational transforms of degree <= 4 go
/// through exact residues, cut-plane transforms with a boundary evaluator
/// through the deformed contour, everything else through fixed Talbot.
inline InversionResult invert_auto(const TransformFunction& F, double t) {
  if (F.analyticity == Analyticity::Meromorphic && F.rational &&
      F.rational->den.size() >= 2 && F.rational->den.size() <= 5 &&
      F.poles.size() <= 4) {
    try {
      return {invert_rational(*F.rational, t), InversionMethod::Residues};
    } catch (const NumericalError&) {
      // fall through to Talbot
    }
  }
  if (F.analyticity == Analyticity::CutPlane && F.boundary_below)
    return {invert_branchcut(F, t), InversionMethod::BranchCut};
  return {invert_talbot(F, t), InversionMethod::Talbot};
}

}  // namespace viscowave
