#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "viscowave/kernels.hpp"

using namespace viscowave;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}

RelaxationKernel random_kernel(std::mt19937& rng) {
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (pick(rng)) {
    case 0: {
      std::vector<PronyTerm> terms;
      const int k = 1 + int(unit(rng) * 2.99);
      for (int i = 0; i < k; ++i)
        terms.push_back({0.1 + 2.9 * unit(rng), 5.0 * unit(rng)});
      return RelaxationKernel::prony(terms);
    }
    case 1:
      return RelaxationKernel::power_law(0.5 + 1.5 * unit(rng), 0.1 + 0.8 * unit(rng));
    default:
      return RelaxationKernel::stretched_exponential(0.15 + 0.7 * unit(rng),
                                                     0.5 + 1.5 * unit(rng));
  }
}

}  // namespace

TEST_CASE("kernel factories reject out-of-range parameters", "[kernels]") {
  CHECK_THROWS_WITH(RelaxationKernel::prony({}), ContainsSubstring("non-empty"));
  CHECK_THROWS_WITH(RelaxationKernel::prony({{-1.0, 1.0}}),
                    ContainsSubstring("modulus"));
  CHECK_THROWS_WITH(RelaxationKernel::prony({{1.0, -1.0}}), ContainsSubstring("rate"));
  CHECK_THROWS_WITH(RelaxationKernel::power_law(0.0, 0.5),
                    ContainsSubstring("amplitude"));
  CHECK_THROWS_WITH(RelaxationKernel::power_law(1.0, 1.0), ContainsSubstring("alpha"));
  CHECK_THROWS_WITH(RelaxationKernel::stretched_exponential(0.5, 0.0),
                    ContainsSubstring("tau"));
  CHECK_THROWS_WITH(RelaxationKernel::stretched_exponential(1.2, 1.0),
                    ContainsSubstring("alpha_k"));
  CHECK_THROWS_WITH(
      MaterialModel::make(0.0, 1.0, RelaxationKernel::zero()),
      ContainsSubstring("rho"));
  CHECK_THROWS_WITH(
      MaterialModel::make(1.0, -1.0, RelaxationKernel::zero()),
      ContainsSubstring("N must be >= 0"));
  CHECK_THROWS_WITH(MaterialModel::make(1.0, 0.0, RelaxationKernel::zero()),
                    ContainsSubstring("no medium"));
}

TEST_CASE("eval_g closed forms", "[kernels]") {
  CHECK(eval_g(RelaxationKernel::prony({{1.0, 1.0}}), 1.0) ==
        Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(eval_g(RelaxationKernel::power_law(1.0, 0.5), 1.0) ==
        Approx(0.56418958354775629).epsilon(1e-14));  // 1/sqrt(pi)
  CHECK(eval_g(RelaxationKernel::stretched_exponential(0.5, 1.0), 4.0) ==
        Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(eval_g(RelaxationKernel::power_law(1.0, 0.5), 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(eval_g(RelaxationKernel::prony({{1.0, 1.0}}), -1.0),
                  std::domain_error);
}

TEST_CASE("eval_g is non-negative and non-increasing", "[kernels][property]") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> ts(-2.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    auto k = random_kernel(rng);
    double t1 = std::pow(10.0, ts(rng));
    double t2 = t1 * (1.0 + std::abs(ts(rng)));
    const double g1 = eval_g(k, t1), g2 = eval_g(k, t2);
    CHECK(g1 >= 0.0);
    CHECK(g1 >= g2 - 1e-12 * std::max(1.0, g1));
  }
}

TEST_CASE("laplace_g closed forms and oracle values", "[kernels]") {
  CHECK(laplace_g(RelaxationKernel::prony({{1.0, 1.0}}), {1.0, 0.0}).real() ==
        Approx(0.5).epsilon(1e-14));
  CHECK(laplace_g(RelaxationKernel::power_law(1.0, 0.5), {4.0, 0.0}).real() ==
        Approx(0.5).epsilon(1e-13));

  // stretched exponential against the exact erfc transform of exp(-sqrt(t))
  const auto kww = RelaxationKernel::stretched_exponential(0.5, 1.0);
  CHECK(laplace_g(kww, {10.0, 0.0}).real() ==
        Approx(0.076349761429370258).epsilon(1e-8));
  const Complex at_c = laplace_g(kww, {2.0, -3.0});
  CHECK(at_c.real() == Approx(0.13204057478566438).epsilon(1e-9));
  CHECK(at_c.imag() == Approx(0.13215812401076992).epsilon(1e-9));
  const Complex axis = laplace_g(kww, {0.0, -100.0});
  CHECK(axis.real() == Approx(0.00057822183472845622).epsilon(1e-8));
  CHECK(axis.imag() == Approx(0.0093748281974104854).epsilon(1e-8));

  // tau rescaling: exp(-(t/4)^(1/2)) = exp(-a sqrt t) with a = 1/2
  CHECK(laplace_g(RelaxationKernel::stretched_exponential(0.5, 4.0), {10.0, 0.0})
            .real() == Approx(0.087154891096426512).epsilon(1e-8));

  // sums add
  const auto sum = RelaxationKernel::sum(
      {RelaxationKernel::prony({{1.0, 1.0}}), RelaxationKernel::power_law(1.0, 0.5)});
  const Complex p{3.0, 1.0};
  CHECK(std::abs(laplace_g(sum, p) -
                 (laplace_g(RelaxationKernel::prony({{1.0, 1.0}}), p) +
                  laplace_g(RelaxationKernel::power_law(1.0, 0.5), p))) < 1e-14);

  CHECK_THROWS_AS(laplace_g(kww, {0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(laplace_g(kww, {-1.0, 0.0}), std::domain_error);
}

TEST_CASE("laplace_g conjugate symmetry and decay", "[kernels][property]") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> re(0.01, 50.0), im(-50.0, 50.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto k = random_kernel(rng);
    const Complex p{re(rng), im(rng)};
    const Complex a = laplace_g(k, p);
    const Complex b = laplace_g(k, std::conj(p));
    CHECK(std::abs(b - std::conj(a)) <= 1e-12 * std::abs(a) + 1e-15);
  }
  // |G~| -> 0 along the real axis
  CHECK(std::abs(laplace_g(RelaxationKernel::prony({{1.0, 1.0}}), {1e8, 0.0})) < 1e-7);
}

TEST_CASE("q_function values and real-axis monotonicity", "[kernels]") {
  const auto zero = RelaxationKernel::zero();
  CHECK(q_function(MaterialModel::make(1.0, 1.0, zero), {3.0, 0.0}).real() ==
        Approx(3.0));
  CHECK(q_function(MaterialModel::make(1.0, 0.0, RelaxationKernel::prony({{1.0, 1.0}})),
                   {1.0, 0.0})
            .real() == Approx(0.5));
  CHECK(q_function(MaterialModel::make(1.0, 1.0, RelaxationKernel::power_law(1.0, 0.5)),
                   {4.0, 0.0})
            .real() == Approx(6.0).epsilon(1e-13));

  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto model = MaterialModel::make(1.0, 0.25, random_kernel(rng));
    double prev = 0.0;
    for (double p : log_grid(1e-3, 1e6, 40)) {
      const Complex q = q_function(model, {p, 0.0});
      CHECK(std::abs(q.imag()) < 1e-12 * std::abs(q));
      CHECK(q.real() >= prev - 1e-10 * std::max(1.0, q.real()));
      prev = q.real();
    }
  }
}

TEST_CASE("g0_closed_form per variant", "[kernels]") {
  CHECK(g0_closed_form(RelaxationKernel::prony({{2.0, 1.0}, {3.0, 5.0}})).value() ==
        Approx(5.0));
  CHECK(g0_closed_form(RelaxationKernel::power_law(2.0, 0.3)).is_infinite());
  CHECK(g0_closed_form(RelaxationKernel::stretched_exponential(0.3, 2.0)).value() ==
        Approx(1.0));
  CHECK(g0_closed_form(RelaxationKernel::zero()).value() == 0.0);
  CHECK(g0_closed_form(
            RelaxationKernel::sum({RelaxationKernel::prony({{2.0, 1.0}}),
                                   RelaxationKernel::stretched_exponential(0.5, 1.0)}))
            .value() == Approx(3.0));
  CHECK(g0_closed_form(RelaxationKernel::sum({RelaxationKernel::prony({{1.0, 1.0}}),
                                              RelaxationKernel::power_law(1.0, 0.5)}))
            .is_infinite());
}

TEST_CASE("tauberian_g0 matches the closed form", "[kernels]") {
  CHECK(tauberian_g0(RelaxationKernel::prony({{1.0, 1.0}}), 1e6).value() ==
        Approx(1.0).epsilon(1e-4));
  CHECK(tauberian_g0(RelaxationKernel::power_law(1.0, 0.5), 1e6).is_infinite());
  CHECK(tauberian_g0(RelaxationKernel::stretched_exponential(0.5, 1.0), 1e6).value() ==
        Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(tauberian_g0(RelaxationKernel::zero(), 100.0), std::invalid_argument);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 15; ++trial) {
    auto k = random_kernel(rng);
    const ExtendedReal closed = g0_closed_form(k);
    const ExtendedReal numeric = tauberian_g0(k, 1e8);
    REQUIRE(closed.is_infinite() == numeric.is_infinite());
    if (!closed.is_infinite())
      CHECK(numeric.value() == Approx(closed.value()).epsilon(1e-3).margin(1e-6));
  }
}

TEST_CASE("cm_check passes CM kernels and flags a non-CM function", "[kernels]") {
  const auto grid = log_grid(0.01, 10.0, 24);
  CHECK(cm_check(RelaxationKernel::prony({{1.0, 1.0}, {2.0, 3.0}}), 3, grid).passed);
  CHECK(cm_check(RelaxationKernel::stretched_exponential(0.5, 1.0), 3, grid).passed);
  CHECK(cm_check(RelaxationKernel::power_law(1.0, 0.5), 4, grid).passed);

  auto oscillating = [](double t) { return std::exp(-t) * std::cos(5.0 * t); };
  const auto report = cm_check(oscillating, 2, grid);
  CHECK_FALSE(report.passed);
  CHECK_FALSE(report.violations.empty());

  CHECK_THROWS_AS(cm_check(RelaxationKernel::zero(), 5, grid), std::invalid_argument);
  CHECK_THROWS_AS(cm_check(RelaxationKernel::zero(), 2, log_grid(0.1, 1.0, 8)),
                  std::invalid_argument);
  std::vector<double> bad{-1.0, 0.5, 1.0};
  bad.resize(16, 2.0);
  CHECK_THROWS_AS(cm_check(RelaxationKernel::zero(), 2, bad), std::invalid_argument);
}

TEST_CASE("structure queries", "[kernels]") {
  CHECK(strongest_power_law_exponent(
            RelaxationKernel::sum({RelaxationKernel::power_law(1.0, 0.3),
                                   RelaxationKernel::power_law(1.0, 0.7)}))
            .value() == Approx(0.7));
  CHECK_FALSE(strongest_power_law_exponent(RelaxationKernel::prony({{1.0, 1.0}})));
  CHECK(gprime_singularity_exponent(RelaxationKernel::stretched_exponential(0.4, 1.0))
            .value() == Approx(0.6));
  CHECK_FALSE(gprime_singularity_exponent(RelaxationKernel::prony({{1.0, 1.0}})));
}
