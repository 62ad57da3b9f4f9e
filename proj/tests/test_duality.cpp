#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "viscowave/duality.hpp"

using namespace viscowave;
using Catch::Approx;

namespace {

std::vector<double> uniform_grid(double h, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = (i + 1) * h;
  return g;
}

/// Short-time dyadic head followed by a coarser ramp, for slope extrapolation.
std::vector<double> dyadic_grid(double t0, int levels, double t_max, int tail) {
  std::vector<double> g;
  for (int j = 0; j < levels; ++j) g.push_back(t0 * std::pow(2.0, j));
  const double start = g.back() * 1.5;
  for (int i = 0; i < tail; ++i)
    g.push_back(start + (t_max - start) * double(i + 1) / tail);
  return g;
}

MaterialModel prony_model(double N) {
  return MaterialModel::make(1.0, N, RelaxationKernel::prony({{1.0, 1.0}}));
}
MaterialModel power_model(double N) {
  return MaterialModel::make(1.0, N, RelaxationKernel::power_law(1.0, 0.5));
}
MaterialModel kww_model(double N) {
  return MaterialModel::make(1.0, N, RelaxationKernel::stretched_exponential(0.5, 1.0));
}

}  // namespace

TEST_CASE("initial-value limits per family", "[duality]") {
  // Prony with N = 2: c0 = 0, C'(0) = 1/N
  {
    auto [c0, rate] = limits_c0_cprime0(prony_model(2.0));
    CHECK(c0 == Approx(0.0).margin(1e-12));
    REQUIRE_FALSE(rate.is_infinite());
    CHECK(rate.value() == Approx(0.5).epsilon(1e-6));
  }
  // power law with N = 0: c0 = 0, C'(0) infinite
  {
    auto [c0, rate] = limits_c0_cprime0(power_model(0.0));
    CHECK(c0 == Approx(0.0).margin(1e-12));
    CHECK(rate.is_infinite());
  }
  // stretched exponential with N = 0: c0 = 1/G0 = 1, C'(0) infinite
  {
    auto [c0, rate] = limits_c0_cprime0(kww_model(0.0));
    CHECK(c0 == Approx(1.0).epsilon(1e-6));
    CHECK(rate.is_infinite());
  }
  // Maxwell: c0 = 1, C'(0) = 1
  {
    auto [c0, rate] = limits_c0_cprime0(prony_model(0.0));
    CHECK(c0 == Approx(1.0).epsilon(1e-8));
    REQUIRE_FALSE(rate.is_infinite());
    CHECK(rate.value() == Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("N C'(0) = 1 across families for N > 0", "[duality][property]") {
  for (double N : {0.5, 1.0, 2.0}) {
    for (auto& model : {prony_model(N), power_model(N), kww_model(N)}) {
      auto [c0, rate] = limits_c0_cprime0(model);
      CHECK(c0 == Approx(0.0).margin(1e-10));
      REQUIRE_FALSE(rate.is_infinite());
      CHECK(std::abs(N * rate.value() - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("creep_from_model closed-form cases", "[duality]") {
  const auto grid = uniform_grid(0.01, 400);  // t in (0, 4]

  // pure Newtonian: C = t/N exactly
  {
    auto curve = creep_from_model(
        MaterialModel::make(1.0, 1.0, RelaxationKernel::zero()), grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(curve.C[i] == Approx(grid[i]).epsilon(1e-9));
  }
  // Maxwell: C = 1 + t
  {
    auto curve = creep_from_model(prony_model(0.0), grid);
    CHECK(curve.c0 == Approx(1.0).epsilon(1e-8));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(curve.C[i] == Approx(1.0 + grid[i]).epsilon(1e-8));
      CHECK(curve.C_rate[i] == Approx(1.0).epsilon(1e-8));
    }
  }
  // Example 2 at N = 1: C'(t) = (1 + e^{-2t})/2
  {
    auto curve = creep_from_model(prony_model(1.0), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double expected = 0.5 * (1.0 + std::exp(-2.0 * grid[i]));
      CHECK(curve.C_rate[i] == Approx(expected).epsilon(1e-10));
    }
    CHECK(curve.C_rate[99] == Approx(0.56766764161830635).epsilon(1e-10));  // t = 1
  }
  // strong singularity: C = sqrt(t)/Gamma(3/2), C' = 1/sqrt(pi t)
  {
    auto curve = creep_from_model(power_model(0.0), grid);
    for (std::size_t i = 0; i < grid.size(); i += 37) {
      CHECK(curve.C[i] ==
            Approx(std::sqrt(grid[i]) / 0.88622692545275801).epsilon(1e-8));
      CHECK(curve.C_rate[i] ==
            Approx(1.0 / std::sqrt(M_PI * grid[i])).epsilon(1e-7));
    }
    CHECK(curve.c0 == 0.0);
    CHECK(curve.c_rate0.is_infinite());
  }
}

TEST_CASE("creep_from_model matches high-precision references", "[duality]") {
  // frozen 30-digit Talbot inversions of 1/(p Q) for the KWW kernel
  {
    auto curve = creep_from_model(kww_model(0.0), {0.5, 1.0, 5.0});
    CHECK(curve.C[0] == Approx(1.857900802362826).epsilon(1e-9));
    CHECK(curve.C[1] == Approx(2.3079842642115).epsilon(1e-9));
    CHECK(curve.C[2] == Approx(4.900112240889637).epsilon(1e-9));
    CHECK(curve.C_rate[1] == Approx(0.81874065040766030).epsilon(1e-8));
  }
  {
    auto curve = creep_from_model(kww_model(2.0), {1.0, 5.0});
    CHECK(curve.C[0] == Approx(0.43270695056256507).epsilon(1e-9));
    CHECK(curve.C[1] == Approx(1.7234521020445200).epsilon(1e-9));
  }
  {
    auto curve = creep_from_model(power_model(0.5), {1.0, 5.0});
    CHECK(curve.C[0] == Approx(0.75607700525076540).epsilon(1e-8));
    CHECK(curve.C[1] == Approx(2.0847394920641060).epsilon(1e-8));
  }
}

TEST_CASE("volterra solver reproduces closed forms", "[duality]") {
  const int n = 1000;
  const double h = 1e-3;
  const auto grid = uniform_grid(h, n);

  // pure Newtonian: exact
  {
    auto curve = volterra_solve_creep(
        MaterialModel::make(1.0, 1.0, RelaxationKernel::zero()), grid);
    for (int i = 0; i < n; i += 111)
      CHECK(curve.C[i] == Approx(grid[i]).epsilon(1e-12));
  }
  // Maxwell first kind: C = 1 + t
  {
    auto curve = volterra_solve_creep(prony_model(0.0), grid);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(curve.C[i] - (1.0 + grid[i])));
    CHECK(worst < 1e-6);
  }
  // strong singularity first kind: C = sqrt(t)/Gamma(3/2)
  {
    auto curve = volterra_solve_creep(power_model(0.0), grid);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst,
                       std::abs(curve.C[i] - std::sqrt(grid[i]) / 0.88622692545275801));
    CHECK(worst < 1e-5);
  }

  CHECK_THROWS_AS(volterra_solve_creep(
                      MaterialModel::make(1.0, 1.0, RelaxationKernel::zero()),
                      std::vector<double>{0.1, 0.3, 0.35}),
                  std::invalid_argument);
}

TEST_CASE("transform and time-domain paths agree", "[duality][property]") {
  const double h = 1e-3;
  const int n = 1500;
  const auto grid = uniform_grid(h, n);
  struct Case {
    MaterialModel model;
    double tol;
  };
  const Case cases[] = {
      {prony_model(0.0), 1e-9}, {prony_model(0.5), 1e-6}, {prony_model(2.0), 1e-6},
      {power_model(0.0), 1e-5}, {power_model(0.5), 1e-5}, {power_model(2.0), 1e-5},
      {kww_model(0.0), 1e-4},   {kww_model(0.5), 1e-5},   {kww_model(2.0), 1e-5},
  };
  for (const auto& c : cases) {
    auto transform_path = creep_from_model(c.model, grid);
    auto time_path = volterra_solve_creep(c.model, grid);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(transform_path.C[i] - time_path.C[i]) /
                                  std::abs(transform_path.C[i]));
    INFO("N = " << c.model.newtonian);
    CHECK(worst < c.tol);
  }
}

TEST_CASE("duality residual", "[duality]") {
  const int n = 2000;
  const double h = 1e-3;
  const auto grid = uniform_grid(h, n);

  // pure Newtonian, C = t: residual at round-off
  {
    CreepCurve curve;
    curve.t = grid;
    curve.c0 = 0.0;
    for (double t : grid) {
      curve.C.push_back(t);
      curve.C_rate.push_back(1.0);
    }
    const auto model = MaterialModel::make(1.0, 1.0, RelaxationKernel::zero());
    CHECK(duality_residual(model, curve) < 1e-12);
    // corrupted curve: residual ~ 0.01 t_max
    for (auto& v : curve.C) v *= 1.01;
    CHECK(duality_residual(model, curve) == Approx(0.01 * grid.back()).epsilon(1e-6));
  }
  // Maxwell oracle curve
  {
    CreepCurve curve;
    curve.t = grid;
    curve.c0 = 1.0;
    for (double t : grid) {
      curve.C.push_back(1.0 + t);
      curve.C_rate.push_back(1.0);
    }
    CHECK(duality_residual(prony_model(0.0), curve) < 1e-6);
  }
}

TEST_CASE("newtonian_from_creep classifies and estimates", "[duality]") {
  const auto grid = dyadic_grid(1e-4, 12, 5.0, 40);

  // Example-2 oracle curve, N = 1: C = t/2 + (1 - e^{-2t})/4
  {
    CreepCurve curve;
    curve.t = grid;
    curve.c0 = 0.0;
    for (double t : grid) {
      curve.C.push_back(0.5 * t + 0.25 * (1.0 - std::exp(-2.0 * t)));
      curve.C_rate.push_back(0.5 * (1.0 + std::exp(-2.0 * t)));
    }
    auto est = newtonian_from_creep(curve);
    CHECK(est.flag == CreepRegimeFlag::NewtonianPresent);
    CHECK(est.newtonian == Approx(1.0).epsilon(1e-3));
  }
  // Maxwell curve: jump compliance
  {
    CreepCurve curve;
    curve.t = grid;
    curve.c0 = 1.0;
    for (double t : grid) {
      curve.C.push_back(1.0 + t);
      curve.C_rate.push_back(1.0);
    }
    CHECK(newtonian_from_creep(curve).flag == CreepRegimeFlag::JumpCompliance);
  }
  // power-law curve: infinite initial slope
  {
    CreepCurve curve;
    curve.t = grid;
    curve.c0 = 0.0;
    for (double t : grid) {
      curve.C.push_back(std::sqrt(t) / 0.88622692545275801);
      curve.C_rate.push_back(1.0 / std::sqrt(M_PI * t));
    }
    CHECK(newtonian_from_creep(curve).flag == CreepRegimeFlag::InfiniteInitialSlope);
  }
  // round trip through creep_from_model
  for (double N : {0.5, 2.0}) {
    auto curve = creep_from_model(prony_model(N), grid);
    auto est = newtonian_from_creep(curve);
    CHECK(est.flag == CreepRegimeFlag::NewtonianPresent);
    CHECK(est.newtonian == Approx(N).epsilon(1e-3));
  }

  // input validation: non-Bernstein curve
  {
    CreepCurve bad;
    bad.t = {0.001, 0.002, 0.004, 0.008, 0.016, 0.032, 0.064, 0.128, 0.5, 1.0};
    for (double t : bad.t) {
      bad.C.push_back(std::sin(8.0 * t) + t);  // not concave
      bad.C_rate.push_back(1.0);
    }
    CHECK_THROWS_AS(newtonian_from_creep(bad), std::invalid_argument);
  }
  // too few head points
  {
    CreepCurve tiny;
    tiny.t = {0.1, 0.2, 0.3, 0.4};
    tiny.C = {0.1, 0.2, 0.3, 0.4};
    tiny.C_rate = {1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(newtonian_from_creep(tiny), std::invalid_argument);
  }
}

TEST_CASE("produced curves keep the Bernstein shape", "[duality][property]") {
  const auto grid = uniform_grid(5e-3, 200);
  for (auto& model : {prony_model(0.0), prony_model(2.0), power_model(0.0),
                      kww_model(0.0), kww_model(0.5)}) {
    auto curve = creep_from_model(model, grid);
    CHECK_NOTHROW(validate_creep_curve(curve));
  }
}
