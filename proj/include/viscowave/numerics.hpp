#pragma once

// Small numerical toolbox shared by the physics modules: adaptive
// Gauss-Kronrod quadrature, Aitken sequence extrapolation, dense real
// polynomials with a Durand-Kerner root finder, and a least-squares line fit.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "viscowave/common.hpp"

namespace viscowave {
namespace numerics {

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (G7, K15)
// ---------------------------------------------------------------------------

namespace detail {
// Kronrod-15 abscissae (positive half) and weights; Gauss-7 weights sit on
// the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

inline double norm_of(double v) { return std::abs(v); }
inline double norm_of(const Complex& v) { return std::abs(v); }
}  // namespace detail

template <typename T>
struct QuadResult {
  T value{};
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// One G7/K15 pass on [a, b]; returns the K15 value and |K15 - G7|.
template <typename T, typename F>
QuadResult<T> gk15(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  T k{};
  T g{};
  for (std::size_t i = 0; i < 8; ++i) {
    const double x = detail::kKronrodNodes[i];
    T v = (i == 7) ? f(mid) : T(f(mid - hw * x) + f(mid + hw * x));
    k += detail::kKronrodWeights[i] * v;
    if (i % 2 == 1) g += detail::kGaussWeights[i / 2] * v;
  }
  QuadResult<T> r;
  r.value = hw * k;
  r.error_estimate = detail::norm_of(T(hw * (k - g)));
  r.evaluations = 15;
  return r;
}

/// Adaptive bisection around gk15 until the local error estimate is below
/// max(abs_tol, rel_tol * |whole|).  Throws NumericalError on non-finite
/// integrand values or when max_depth subdivisions do not suffice.
template <typename T, typename F>
QuadResult<T> adaptive_gk(F&& f, double a, double b, double rel_tol = 1e-10,
                          double abs_tol = 0.0, int max_depth = 48) {
  QuadResult<T> whole = gk15<T>(f, a, b);
  if (!std::isfinite(detail::norm_of(whole.value)))
    throw NumericalError("adaptive_gk: non-finite integrand on [" +
                         std::to_string(a) + ", " + std::to_string(b) + "]");
  struct Seg {
    double a, b;
    T value;
    double err;
    int depth;
  };
  double tol = std::max(abs_tol, rel_tol * detail::norm_of(whole.value));
  if (whole.error_estimate <= tol) return whole;

  std::vector<Seg> stack{{a, b, whole.value, whole.error_estimate, 0}};
  T total{};
  double total_err = 0.0;
  std::size_t evals = whole.evaluations;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    tol = std::max(abs_tol, rel_tol * detail::norm_of(whole.value));
    const double local_tol = tol * (s.b - s.a) / (b - a);
    if (s.err <= local_tol || s.depth >= max_depth) {
      // depth exhaustion near an integrable endpoint leaves a tiny residual;
      // a residual that rivals the whole integral means divergence
      if (s.depth >= max_depth &&
          s.err > 0.05 * std::max(detail::norm_of(whole.value), 1e-280))
        throw NumericalError("adaptive_gk: subdivision limit reached near x = " +
                             std::to_string(0.5 * (s.a + s.b)));
      total += s.value;
      total_err += s.err;
      continue;
    }
    const double m = 0.5 * (s.a + s.b);
    QuadResult<T> left = gk15<T>(f, s.a, m);
    QuadResult<T> right = gk15<T>(f, m, s.b);
    evals += left.evaluations + right.evaluations;
    if (!std::isfinite(detail::norm_of(left.value)) ||
        !std::isfinite(detail::norm_of(right.value)))
      throw NumericalError("adaptive_gk: non-finite integrand near x = " +
                           std::to_string(m));
    whole.value = whole.value - s.value + left.value + right.value;
    stack.push_back({s.a, m, left.value, left.error_estimate, s.depth + 1});
    stack.push_back({m, s.b, right.value, right.error_estimate, s.depth + 1});
  }
  QuadResult<T> r;
  r.value = total;
  r.error_estimate = total_err;
  r.evaluations = evals;
  return r;
}

/// Integrate f over [a, inf) for integrands with a decaying envelope:
/// geometric panels starting at width w0, stopping once two consecutive
/// panels are negligible against the accumulated value.
template <typename T, typename F>
T integrate_decaying(F&& f, double a, double w0, double rel_tol = 1e-10,
                     double abs_floor = 0.0, int max_panels = 120,
                     double growth = 2.0) {
  T acc{};
  double x0 = a;
  double w = w0;
  int quiet = 0;
  for (int k = 0; k < max_panels; ++k) {
    auto panel = adaptive_gk<T>(f, x0, x0 + w, rel_tol, abs_floor);
    acc += panel.value;
    const double mag = detail::norm_of(panel.value);
    if (mag <= rel_tol * detail::norm_of(acc) + abs_floor) {
      if (++quiet >= 2) return acc;
    } else {
      quiet = 0;
    }
    x0 += w;
    w *= growth;
  }
  throw NumericalError("integrate_decaying: no decay detected by panel limit");
}

// ---------------------------------------------------------------------------
// Sequence limits
// ---------------------------------------------------------------------------

/// One Aitken delta-squared sweep; sequences shorter than 3 pass through.
inline std::vector<double> aitken_sweep(const std::vector<double>& s) {
  if (s.size() < 3) return s;
  std::vector<double> out;
  out.reserve(s.size() - 2);
  for (std::size_t k = 0; k + 2 < s.size(); ++k) {
    const double d1 = s[k + 1] - s[k];
    const double d2 = s[k + 2] - 2.0 * s[k + 1] + s[k];
    if (std::abs(d2) < 1e-300 * std::max(1.0, std::abs(s[k])))
      out.push_back(s[k + 2]);
    else
      out.push_back(s[k] - d1 * d1 / d2);
  }
  return out;
}

/// Iterated Aitken extrapolation of a convergent sequence (2 sweeps).
inline double aitken_limit(std::vector<double> s) {
  for (int sweep = 0; sweep < 2 && s.size() >= 3; ++sweep) s = aitken_sweep(s);
  return s.back();
}

// ---------------------------------------------------------------------------
// Polynomials (real coefficients, ascending order)
// ---------------------------------------------------------------------------

using Poly = std::vector<double>;

inline Complex poly_eval(const Poly& c, Complex p) {
  Complex v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * p + c[i];
  return v;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Poly poly_add(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

inline Poly poly_scale(Poly a, double s) {
  for (double& c : a) c *= s;
  return a;
}

inline Poly poly_derivative(const Poly& c) {
  if (c.size() <= 1) return {0.0};
  Poly d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
  return d;
}

inline void poly_trim(Poly& c) {
  while (c.size() > 1 && std::abs(c.back()) < 1e-14 * std::abs(c.front()) + 1e-300)
    c.pop_back();
}

/// All complex roots by Durand-Kerner iteration.
inline std::vector<Complex> poly_roots(Poly c) {
  poly_trim(c);
  const std::size_t n = c.size() - 1;
  if (n == 0) return {};
  // normalize to monic
  for (std::size_t i = 0; i < c.size(); ++i) c[i] /= c.back();
  double radius = 0.0;
  for (std::size_t i = 0; i < n; ++i) radius = std::max(radius, std::abs(c[i]));
  radius = 1.0 + radius;
  std::vector<Complex> z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = radius * std::polar(1.0, 2.0 * M_PI * (double(i) + 0.3) / double(n));
  for (int iter = 0; iter < 800; ++iter) {
    double move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex num = poly_eval(c, z[i]);
      Complex den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= (z[i] - z[j]);
      if (std::abs(den) < 1e-300) den = 1e-300;
      const Complex dz = num / den;
      z[i] -= dz;
      move = std::max(move, std::abs(dz));
    }
    if (move < 1e-14 * radius) break;
  }
  return z;
}

// ---------------------------------------------------------------------------
// Least squares line fit
// ---------------------------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw std::invalid_argument("fit_line: need at least 2 matched samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      ssr += r * r;
    }
    f.slope_stderr = std::sqrt(ssr / (double(n - 2) * sxx));
  }
  return f;
}

}  // namespace numerics
}  // namespace viscowave
