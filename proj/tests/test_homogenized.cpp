#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "homog/errors.hpp"
#include "homog/homogenized.hpp"

using namespace homog;

namespace {

double stefan_fbar(double u) {
  if (u < -1.5) return u + 0.5;
  if (u > 1.5) return u - 0.5;
  return 2.0 * u / 3.0;
}

// Oracle: invert the mean inverse by bisection on a brute-force mean.
double brute_fbar(const Flux& f, double u) {
  const auto gbar = [&](double v) {
    const std::size_t n = 100'000;
    long double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += pressure_inverse_eval(f, 0.0, {4.0 * (i + 0.5) / n, 0.0}, v);
    return static_cast<double>(s / n);
  };
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gbar(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

const HomogenizedFlux& stefan_table() {
  static const HomogenizedFlux table = [] {
    const std::vector<double> xs = {-2.0, 0.0, 2.0};
    return homogenized_f(flux_presets::stefan(), xs);
  }();
  return table;
}

}  // namespace

TEST_CASE("stefan homogenized flux") {
  const HomogenizedFlux& t = stefan_table();
  const Flux f = flux_presets::stefan();
  for (double u : {-2.0, -0.7, 0.4, 1.9})
    CHECK(brute_fbar(f, u) == doctest::Approx(stefan_fbar(u)).epsilon(1e-5));
  double worst = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double u = -4.0 + 8.0 * i / 4000.0;
    worst = std::max(worst, std::abs(t(0.7, u) - stefan_fbar(u)));
  }
  CHECK(worst < 1e-6);
  CHECK(t.min_slope() == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(t.max_slope() == doctest::Approx(1.0).epsilon(1e-6));
  // Shared across x for an x-independent flux.
  CHECK(t.fbar_ptr(0) == t.fbar_ptr(2));
}

TEST_CASE("fixed point at the table knots") {
  const HomogenizedFlux& t = stefan_table();
  const Flux f = flux_presets::stefan();
  const GbarSampling& s = t.samples_at(1);
  REQUIRE(s.v.size() > 129);
  for (std::size_t i = 0; i < s.v.size(); i += 7) {
    const double u = s.gbar[i];
    CHECK(std::abs(t.fbar_at(1)(homogenized_g(f, 0.0, t.fbar_at(1)(u))) - t.fbar_at(1)(u)) <
          1e-9);
    CHECK(std::abs(t.fbar_at(1)(u) - s.v[i]) < 1e-12);
  }
  CHECK(s.gbar.front() <= -4.0);
  CHECK(s.gbar.back() >= 4.0);
}

TEST_CASE("zero-measure report") {
  const HomogenizedFlux& t = stefan_table();
  const auto& report = t.em0_report();
  REQUIRE(!report.empty());
  for (const Em0Entry& e : report) {
    CHECK(e.alpha == 0.0);
    CHECK(e.mass < 1e-3);
  }
  const nlohmann::json h = t.header();
  CHECK(h["flux"] == "stefan");
  CHECK(h["em0_report"].size() == report.size());
}

TEST_CASE("flat level sets are refused") {
  const std::vector<double> xs = {0.0};
  try {
    homogenized_f(flux_presets::stefan_flat(), xs);
    FAIL("expected Em0Violation");
  } catch (const Em0Violation& e) {
    CHECK(e.alpha() == 0.0);
    CHECK(e.v() == 0.0);
    CHECK(e.mass() == doctest::Approx(1.0));
  }
  // A plateau in the tabulated mean has no inverse.
  const MonotoneProfile plateau = MonotoneProfile::stefan();
  CHECK_THROWS_AS(forward_profile(sample_monotone(plateau, {})), Em0Violation);
}

TEST_CASE("closed-form homogenized fluxes") {
  const std::vector<double> xs = {0.0};
  const HomogenizedFlux harmonic = homogenized_f(flux_presets::harmonic(), xs);
  const HomogenizedFlux cubic = homogenized_f(flux_presets::cubic(), xs);
  const HomogenizedFlux heat = homogenized_f(flux_presets::heat(), xs);
  for (double u : {-3.0, -0.5, 0.0, 0.25, 3.9}) {
    CHECK(harmonic(0.0, u) == doctest::Approx(std::sqrt(3.0) * u).epsilon(1e-9));
    CHECK(cubic(0.0, u) == doctest::Approx(u * u * u + u).epsilon(1e-5));
    CHECK(heat(0.0, u) == doctest::Approx(u).epsilon(1e-12));
  }
  CHECK(heat.em0_report().empty());
}

TEST_CASE("slow dependence is interpolated between tabulated abscissae") {
  const Flux f = Flux::type1(
      "slow", {0.0, 1.0}, {presets::cos1()},
      [](double x, std::span<const double> c, double u) { return (1 + x * x) * (2 + c[0]) * u; },
      [](double x, std::span<const double> c, double v) { return v / ((1 + x * x) * (2 + c[0])); },
      {}, true);
  std::vector<double> xs(11);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 0.1 * static_cast<double>(i);
  const HomogenizedFlux t = homogenized_f(f, xs);
  for (double x : xs)
    CHECK(t(x, 1.0) == doctest::Approx((1 + x * x) * std::sqrt(3.0)).epsilon(1e-9));
  CHECK(t(0.05, 1.0) == doctest::Approx(std::sqrt(3.0) * (1.0 + 0.005)).epsilon(1e-9));
  CHECK(t.fbar_ptr(0) != t.fbar_ptr(1));
}

TEST_CASE("monotone sampling") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> d(-8.0, 8.0);
  const auto fn = [](double v) { return v + std::sin(v) / 2.0; };
  TableOptions o;
  o.u_lo = -8.0;
  o.u_hi = 8.0;
  const GbarSampling s = sample_monotone(fn, o);
  CHECK(s.gbar.front() <= -8.0);
  CHECK(s.gbar.back() >= 8.0);
  const MonotoneProfile inv = inverse_profile(s);
  for (int k = 0; k < 200; ++k) {
    const double u = d(rng);
    CHECK(std::abs(fn(inv(u)) - u) < 1e-6);
  }
  CHECK_THROWS_AS(sample_monotone([](double v) { return std::atan(v); }, o), NonCoercive);
}

TEST_CASE("csv output") {
  const std::vector<double> xs = {0.0, 1.0};
  const HomogenizedFlux t = homogenized_f(flux_presets::heat(), xs);
  const std::vector<double> us = {0.0, 1.0};
  const std::string csv = t.to_csv(us);
  CHECK(csv == "x,u,fbar\n0,0,0\n0,1,1\n1,0,0\n1,1,1\n");
}
