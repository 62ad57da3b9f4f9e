#pragma once

// Complex wavenumber kappa(p) = p sqrt(rho)/sqrt(Q(p)) with the CBF branch
// (Re kappa >= 0 in the right half-plane), attenuation and phase velocity on
// frequency grids, the wavefront speed, high-frequency exponent fits, and
// the creep/relaxation/wave regime classification.

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "viscowave/common.hpp"
#include "viscowave/duality.hpp"
#include "viscowave/kernels.hpp"
#include "viscowave/numerics.hpp"

namespace viscowave {

// ---------------------------------------------------------------------------
// Wavenumber and derived quantities
// ---------------------------------------------------------------------------

/// kappa(p) for Re p >= 0, p != 0 (imaginary-axis values are the boundary
/// limits from Re p > 0).  Principal square root of the CBF Q(p); since
/// |arg Q| <= |arg p| the principal branch already satisfies Re kappa >= 0,
/// and the sign guard below only fires on contract violations.
inline Complex wavenumber(const MaterialModel& model, Complex p) {
  const Complex q = q_function(model, p);
  const double qmag = std::abs(q);
  if (!(qmag > 0.0) || qmag < 1e-300)
    throw NumericalError("wavenumber: Q(p) = 0 (singular medium) at p = (" +
                         std::to_string(p.real()) + ", " + std::to_string(p.imag()) + ")");
  Complex kappa = p * std::sqrt(model.rho) / std::sqrt(q);
  if (p.real() > 0.0 && kappa.real() < -1e-12 * std::abs(kappa)) kappa = -kappa;
  return kappa;
}

/// a(omega) = Re kappa(-i omega) >= 0.
inline double attenuation(const MaterialModel& model, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("attenuation: omega must be > 0");
  return wavenumber(model, Complex(0.0, -omega)).real();
}

/// omega / Im kappa(i omega) > 0.
inline double phase_velocity(const MaterialModel& model, double omega) {
  if (!(omega > 0.0)) throw std::domain_error("phase_velocity: omega must be > 0");
  const Complex k = wavenumber(model, Complex(0.0, -omega));
  return omega / (-k.imag());
}

struct DispersionSample {
  double omega;
  Complex kappa;  // boundary value at p = i omega, so Im kappa >= 0
  double attenuation;
  double phase_velocity;
};

inline DispersionSample dispersion_sample(const MaterialModel& model, double omega) {
  if (!(omega > 0.0))
    throw std::domain_error("dispersion_sample: omega must be > 0");
  const Complex km = wavenumber(model, Complex(0.0, -omega));
  DispersionSample s;
  s.omega = omega;
  s.kappa = std::conj(km);
  s.attenuation = km.real();
  s.phase_velocity = omega / (-km.imag());
  return s;
}

inline std::vector<DispersionSample> dispersion_curve(const MaterialModel& model,
                                                      const std::vector<double>& omegas) {
  std::vector<DispersionSample> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(dispersion_sample(model, w));
  return out;
}

/// Debug-mode branch guard: kappa at p = -i omega versus p = eps - i omega
/// with eps = 1e-8 omega.  Returns the relative deviation.
inline double imaginary_axis_offset_deviation(const MaterialModel& model, double omega) {
  const Complex on_axis = wavenumber(model, Complex(0.0, -omega));
  const Complex off_axis = wavenumber(model, Complex(1e-8 * omega, -omega));
  return std::abs(on_axis - off_axis) / std::abs(on_axis);
}

/// c_inf = sqrt(G0/rho) for N = 0 with bounded G, +infinity otherwise.
inline ExtendedReal c_infinity(const MaterialModel& model) {
  if (model.newtonian > 0.0) return ExtendedReal::infinity();
  const ExtendedReal g0 = g0_closed_form(model.kernel);
  if (g0.is_infinite()) return ExtendedReal::infinity();
  return ExtendedReal::finite(std::sqrt(g0.value() / model.rho));
}

// ---------------------------------------------------------------------------
// High-frequency exponent fit
// ---------------------------------------------------------------------------

struct ExponentFit {
  double slope;
  double slope_stderr;
  double omega_min, omega_max;
  int n_points;
};

/// Least-squares slope of log a(omega) vs log omega on a geometric grid.
inline ExponentFit high_freq_exponent(const MaterialModel& model, double omega_min,
                                      double omega_max, int n_points = 33) {
  if (!(omega_min > 0.0) || !(omega_max / omega_min >= 1e2))
    throw std::invalid_argument("high_freq_exponent: need omega_max/omega_min >= 1e2");
  if (n_points < 16)
    throw std::invalid_argument("high_freq_exponent: need n_points >= 16");
  std::vector<double> lw(n_points), la(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double w =
        omega_min * std::pow(omega_max / omega_min, double(i) / double(n_points - 1));
    const double a = attenuation(model, w);
    if (!(a > 0.0))
      throw NumericalError("high_freq_exponent: non-positive attenuation at omega = " +
                           std::to_string(w));
    lw[i] = std::log(w);
    la[i] = std::log(a);
  }
  auto fit = numerics::fit_line(lw, la);
  return {fit.slope, fit.slope_stderr, omega_min, omega_max, n_points};
}

// ---------------------------------------------------------------------------
// Regime classification
// ---------------------------------------------------------------------------

enum class Regime { WeaklySingularFiniteSpeed, StronglySingular, Newtonian };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::WeaklySingularFiniteSpeed: return "weakly-singular-finite-speed";
    case Regime::StronglySingular: return "strongly-singular";
    case Regime::Newtonian: return "Newtonian";
  }
  return "?";
}

struct RegimeReport {
  Regime regime;
  std::optional<ExtendedReal> c_inf;       // absent when not determinable (creep data)
  std::optional<double> expected_exponent; // attenuation power-law claim, if any
  std::optional<ExponentFit> fit;          // measured high-frequency slope
  bool bounded_attenuation = false;        // smooth-kernel case: a(omega) stays bounded
  std::optional<double> attenuation_probe; // a at probe_omega (evidence)
  double probe_omega = 0.0;
  std::optional<double> newtonian_estimate;  // creep-side N = 1/C'(0)
  std::optional<double> c0;                  // creep-side C(0) evidence
  std::string notes;
};

/// Classify a material model into the three wave-propagation regimes and
/// attach numeric evidence (wavefront speed, fitted attenuation exponent).
inline RegimeReport classify_model(const MaterialModel& model) {
  RegimeReport rep{};
  rep.c_inf = c_infinity(model);
  if (model.newtonian > 0.0) {
    rep.regime = Regime::Newtonian;
    rep.expected_exponent = 0.5;
    rep.fit = high_freq_exponent(model, 1e3, 1e6);
    rep.probe_omega = 1e8;
    rep.attenuation_probe = attenuation(model, 1e8);
    rep.notes = "Newtonian viscosity dominates high-frequency attenuation";
    return rep;
  }
  const ExtendedReal g0 = g0_closed_form(model.kernel);
  if (g0.is_infinite()) {
    rep.regime = Regime::StronglySingular;
    if (auto alpha = strongest_power_law_exponent(model.kernel))
      rep.expected_exponent = 1.0 - 0.5 * *alpha;
    rep.fit = high_freq_exponent(model, 1e3, 1e6);
    rep.probe_omega = 1e6;
    rep.attenuation_probe = attenuation(model, 1e6);
    rep.notes = "unbounded relaxation kernel, infinite wavefront speed";
    return rep;
  }
  rep.regime = Regime::WeaklySingularFiniteSpeed;
  if (auto a = gprime_singularity_exponent(model.kernel)) {
    rep.expected_exponent = *a;  // a(omega) ~ omega^a where G' ~ -A t^-a
    rep.fit = high_freq_exponent(model, 1e2, 1e5);
    rep.probe_omega = 1e5;
    rep.attenuation_probe = attenuation(model, 1e5);
    rep.notes = "weakly singular kernel, finite wavefront speed";
  } else {
    // smooth relaxation spectrum: attenuation stays bounded, a power-law fit
    // would be meaningless
    rep.bounded_attenuation = true;
    rep.probe_omega = 1e4;
    rep.attenuation_probe = attenuation(model, 1e4);
    rep.notes = "smooth kernel: bounded attenuation, no exponent claim";
  }
  return rep;
}

/// Classify sampled creep data by its initial behavior: jump (row 1),
/// infinite initial slope (row 2), or finite slope with N = 1/C'(0) (row 3).
inline RegimeReport classify_from_creep(const CreepCurve& curve, double tol_c0 = -1.0) {
  auto est = newtonian_from_creep(curve, tol_c0);
  RegimeReport rep{};
  rep.c0 = curve.c0;
  switch (est.flag) {
    case CreepRegimeFlag::JumpCompliance:
      rep.regime = Regime::WeaklySingularFiniteSpeed;
      rep.notes = "compliance jump C(0) > 0: no Newtonian component, finite speed";
      break;
    case CreepRegimeFlag::InfiniteInitialSlope:
      rep.regime = Regime::StronglySingular;
      rep.c_inf = ExtendedReal::infinity();
      rep.notes = "C(0) = 0 with diverging initial slope: unbounded kernel";
      break;
    case CreepRegimeFlag::NewtonianPresent:
      rep.regime = Regime::Newtonian;
      rep.c_inf = ExtendedReal::infinity();
      rep.newtonian_estimate = est.newtonian;
      rep.notes = "C(0) = 0 with finite C'(0): Newtonian component present";
      break;
  }
  return rep;
}

}  // namespace viscowave
