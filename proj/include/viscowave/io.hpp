#pragma once

// File formats: JSON model definitions, CSV curve data with provenance
// headers, machine-readable regime reports, atomic writes.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "viscowave/common.hpp"
#include "viscowave/dispersion.hpp"
#include "viscowave/duality.hpp"
#include "viscowave/kernels.hpp"
#include "viscowave/wavefield.hpp"

namespace viscowave {
namespace io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Numbers and grids
// ---------------------------------------------------------------------------

/// Fixed 12-significant-digit formatting; CSV bodies are byte-reproducible.
inline std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

enum class Spacing { Linear, Geometric };

inline Spacing parse_spacing(const std::string& s) {
  if (s == "linear") return Spacing::Linear;
  if (s == "geometric") return Spacing::Geometric;
  throw std::invalid_argument("spacing must be 'linear' or 'geometric', got '" + s + "'");
}

inline std::vector<double> make_grid(double lo, double hi, int count, Spacing spacing) {
  if (count < 2) throw std::invalid_argument("grid: count must be >= 2");
  if (!(hi > lo)) throw std::invalid_argument("grid: max must exceed min");
  if (spacing == Spacing::Geometric && !(lo > 0.0))
    throw std::invalid_argument("grid: geometric spacing needs min > 0");
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) {
    const double f = double(i) / double(count - 1);
    g[i] = (spacing == Spacing::Linear) ? lo + f * (hi - lo)
                                        : lo * std::pow(hi / lo, f);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Model definition files
// ---------------------------------------------------------------------------

inline json kernel_to_json(const RelaxationKernel& k) {
  if (k.is<ZeroKernel>()) return json{{"type", "zero"}};
  if (k.is<PronySeries>()) {
    json terms = json::array();
    for (const auto& t : k.as<PronySeries>().terms)
      terms.push_back(json::array({t.modulus, t.rate}));
    return json{{"type", "prony"}, {"terms", terms}};
  }
  if (k.is<PowerLaw>()) {
    const auto& p = k.as<PowerLaw>();
    return json{{"type", "power_law"}, {"A", p.amplitude}, {"alpha", p.exponent}};
  }
  if (k.is<StretchedExponential>()) {
    const auto& s = k.as<StretchedExponential>();
    return json{{"type", "stretched_exp"}, {"alpha", s.exponent}, {"tau", s.time_scale}};
  }
  json parts = json::array();
  for (const auto& part : k.as<SumKernel>().parts) parts.push_back(kernel_to_json(part));
  return json{{"type", "sum"}, {"parts", parts}};
}

inline RelaxationKernel kernel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw std::invalid_argument("kernel: expected an object with a 'type' field");
  const std::string type = j.at("type").get<std::string>();
  if (type == "zero") return RelaxationKernel::zero();
  if (type == "prony") {
    if (!j.contains("terms") || !j.at("terms").is_array())
      throw std::invalid_argument("prony kernel: 'terms' must be an array of [g, r] pairs");
    std::vector<PronyTerm> terms;
    for (const auto& e : j.at("terms")) {
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("prony kernel: each term must be a [g, r] pair");
      terms.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return RelaxationKernel::prony(std::move(terms));
  }
  if (type == "power_law")
    return RelaxationKernel::power_law(j.at("A").get<double>(),
                                       j.at("alpha").get<double>());
  if (type == "stretched_exp")
    return RelaxationKernel::stretched_exponential(j.at("alpha").get<double>(),
                                                   j.at("tau").get<double>());
  if (type == "sum") {
    if (!j.contains("parts") || !j.at("parts").is_array())
      throw std::invalid_argument("sum kernel: 'parts' must be an array of kernels");
    std::vector<RelaxationKernel> parts;
    for (const auto& e : j.at("parts")) parts.push_back(kernel_from_json(e));
    return RelaxationKernel::sum(std::move(parts));
  }
  throw std::invalid_argument(
      "kernel: unknown type '" + type +
      "' (expected zero | prony | power_law | stretched_exp | sum)");
}

inline json model_to_json(const MaterialModel& m) {
  return json{{"rho", m.rho},
              {"newtonian_N", m.newtonian},
              {"kernel", kernel_to_json(m.kernel)}};
}

inline MaterialModel model_from_json(const json& j) {
  if (!j.is_object())
    throw std::invalid_argument("model: expected a JSON object");
  for (const char* field : {"rho", "newtonian_N", "kernel"})
    if (!j.contains(field))
      throw std::invalid_argument(std::string("model: missing field '") + field + "'");
  return MaterialModel::make(j.at("rho").get<double>(),
                             j.at("newtonian_N").get<double>(),
                             kernel_from_json(j.at("kernel")));
}

inline MaterialModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Atomic writes and provenance
// ---------------------------------------------------------------------------

inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

/// '#'-prefixed provenance header: tool version plus caller-supplied lines
/// (config echo, method tags).  No timestamps, so outputs are reproducible.
inline std::string provenance_header(const std::vector<std::string>& lines) {
  std::ostringstream os;
  os << "# viscowave " << kToolVersion << "\n";
  for (const auto& l : lines) os << "# " << l << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string creep_csv(const CreepCurve& curve,
                             const std::vector<std::string>& provenance = {}) {
  std::ostringstream os;
  os << provenance_header(provenance);
  os << "t,C,C_rate\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i)
    os << format_g12(curve.t[i]) << ',' << format_g12(curve.C[i]) << ','
       << format_g12(curve.C_rate[i]) << '\n';
  return os.str();
}

inline void write_creep_csv(const std::string& path, const CreepCurve& curve,
                            const std::vector<std::string>& provenance = {}) {
  atomic_write(path, creep_csv(curve, provenance));
}

/// Parse a creep CSV; c0 and c'(0) are inferred from the short-time samples
/// (linear back-extrapolation for c0, increment growth for the rate class).
/// Curve invariants are validated on load.
inline CreepCurve read_creep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open creep file: " + path);
  CreepCurve curve;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("t,C,C_rate", 0) != 0)
        throw std::invalid_argument("creep file " + path +
                                    ": expected header 't,C,C_rate'");
      header_seen = true;
      continue;
    }
    double t, C, Cr;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &C, &Cr) != 3)
      throw std::invalid_argument("creep file " + path + ": bad row '" + line + "'");
    curve.t.push_back(t);
    curve.C.push_back(C);
    curve.C_rate.push_back(Cr);
  }
  if (curve.t.size() < 2)
    throw std::invalid_argument("creep file " + path + ": need at least 2 rows");
  // infer the t -> 0 limits
  const double slope01 =
      (curve.C[1] - curve.C[0]) / (curve.t[1] - curve.t[0]);
  curve.c0 = std::clamp(curve.C[0] - slope01 * curve.t[0], 0.0, curve.C[0]);
  if (curve.c0 < 1e-9 * std::max(curve.C.back(), 1e-300)) curve.c0 = 0.0;
  const std::size_t probe = std::min<std::size_t>(3, curve.C_rate.size() - 1);
  if (curve.C_rate[0] > 3.0 * curve.C_rate[probe] && probe > 0)
    curve.c_rate0 = ExtendedReal::infinity();
  else
    curve.c_rate0 = ExtendedReal::finite(std::max(0.0, curve.C_rate[0]));
  validate_creep_curve(curve);
  return curve;
}

inline std::string dispersion_csv(const std::vector<DispersionSample>& samples,
                                  const std::vector<std::string>& provenance = {}) {
  std::ostringstream os;
  os << provenance_header(provenance);
  os << "omega,attenuation,phase_velocity,re_kappa,im_kappa\n";
  for (const auto& s : samples)
    os << format_g12(s.omega) << ',' << format_g12(s.attenuation) << ','
       << format_g12(s.phase_velocity) << ',' << format_g12(s.kappa.real()) << ','
       << format_g12(s.kappa.imag()) << '\n';
  return os.str();
}

inline void write_dispersion_csv(const std::string& path,
                                 const std::vector<DispersionSample>& samples,
                                 const std::vector<std::string>& provenance = {}) {
  atomic_write(path, dispersion_csv(samples, provenance));
}

/// Snapshot (x,u) or seismogram (t,u) table; a JSON sidecar carries the model
/// echo, integration controls and per-sample confidence flags.
inline void write_field_csv(const std::string& path, const std::string& abscissa,
                            const std::vector<FieldSample>& samples,
                            const MaterialModel& model, const IntegrationControls& ctl,
                            const std::vector<bool>& low_confidence,
                            const std::vector<std::string>& provenance = {}) {
  std::ostringstream os;
  os << provenance_header(provenance);
  os << abscissa << ",u\n";
  for (const auto& s : samples) {
    const double key = (abscissa == "x") ? s.x : s.t;
    os << format_g12(key) << ',' << format_g12(s.u) << '\n';
  }
  atomic_write(path, os.str());
  json meta{{"tool", std::string("viscowave ") + kToolVersion},
            {"model", model_to_json(model)},
            {"controls",
             {{"quad_tol", ctl.quad_tol},
              {"tail_tol", ctl.tail_tol},
              {"shift_factor", ctl.shift_factor},
              {"max_panels", ctl.max_panels}}},
            {"low_confidence", json(low_confidence)}};
  atomic_write(path + ".meta.json", meta.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Regime reports
// ---------------------------------------------------------------------------

inline json regime_report_json(const RegimeReport& r) {
  json j;
  j["regime"] = to_string(r.regime);
  if (r.c_inf)
    j["c_inf"] = r.c_inf->is_infinite() ? json("inf") : json(r.c_inf->value());
  if (r.expected_exponent) j["expected_exponent"] = *r.expected_exponent;
  if (r.fit) {
    j["fitted_exponent"] = r.fit->slope;
    j["fit_stderr"] = r.fit->slope_stderr;
    j["fit_window"] = json::array({r.fit->omega_min, r.fit->omega_max});
    j["fit_points"] = r.fit->n_points;
  }
  j["bounded_attenuation"] = r.bounded_attenuation;
  if (r.attenuation_probe) {
    j["attenuation_probe"] = *r.attenuation_probe;
    j["probe_omega"] = r.probe_omega;
  }
  if (r.newtonian_estimate) j["newtonian_estimate"] = *r.newtonian_estimate;
  if (r.c0) j["c0"] = *r.c0;
  j["notes"] = r.notes;
  return j;
}

inline std::string regime_report_text(const RegimeReport& r) {
  std::ostringstream os;
  os << "regime: " << to_string(r.regime) << '\n';
  if (r.c_inf)
    os << "wavefront speed c_inf: " << (r.c_inf->is_infinite() ? "inf" : format_g12(r.c_inf->value()))
       << '\n';
  if (r.expected_exponent)
    os << "expected attenuation exponent: " << format_g12(*r.expected_exponent) << '\n';
  if (r.fit)
    os << "fitted exponent: " << format_g12(r.fit->slope) << " +/- "
       << format_g12(r.fit->slope_stderr) << "  (omega in [" << format_g12(r.fit->omega_min)
       << ", " << format_g12(r.fit->omega_max) << "], " << r.fit->n_points << " points)\n";
  if (r.bounded_attenuation) os << "attenuation: bounded (no power-law exponent)\n";
  if (r.attenuation_probe)
    os << "a(" << format_g12(r.probe_omega) << ") = " << format_g12(*r.attenuation_probe)
       << '\n';
  if (r.newtonian_estimate)
    os << "Newtonian coefficient estimate: " << format_g12(*r.newtonian_estimate) << '\n';
  if (r.c0) os << "C(0): " << format_g12(*r.c0) << '\n';
  os << "notes: " << r.notes << '\n';
  return os.str();
}

}  // namespace io
}  // namespace viscowave
