#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "homog/dual.hpp"
#include "homog/solver.hpp"

using namespace homog;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs_error(const Grid1D& g, const std::vector<double>& u,
                     const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < g.N; ++i) e = std::max(e, std::abs(u[i] - exact(g.x(i))));
  return e;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("zero data has zero potential") {
  const Grid1D g(0.0, 1.0, 32);
  const DualField U = inverse_laplacian(Field::zeros(g));
  for (double x : U.U.values) CHECK(x == 0.0);
  CHECK(U.U.role == Role::Pressure);
}

TEST_CASE("analytic potentials converge at second order") {
  double prev_sine = 0.0, prev_const = 0.0;
  for (std::size_t n : {64u, 128u, 256u}) {
    const Grid1D g(0.0, 1.0, n);
    std::vector<double> h(n), one(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) h[i] = -pi * pi * std::sin(pi * g.x(i));
    const double e_sine =
        max_abs_error(g, inverse_laplacian(g, h), [](double x) { return std::sin(pi * x); });
    const double e_const = max_abs_error(g, inverse_laplacian(g, one),
                                         [](double x) { return 0.5 * x * (x - 1.0); });
    CHECK(e_sine < g.dx() * g.dx());
    CHECK(e_const < g.dx() * g.dx());
    if (prev_sine > 0.0) {
      CHECK(prev_sine / e_sine == doctest::Approx(4.0).epsilon(0.1));
      CHECK(prev_const / e_const == doctest::Approx(4.0).epsilon(0.1));
    }
    prev_sine = e_sine;
    prev_const = e_const;
  }
}

TEST_CASE("round trip, linearity and the Green bound") {
  std::mt19937_64 rng(29);
  const Grid1D g(-2.0, 2.0, 200);
  const double green = (g.b - g.a) * (g.b - g.a) / 8.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> h1 = random_vector(g.N, rng, 5.0);
    const std::vector<double> h2 = random_vector(g.N, rng, 5.0);
    const DualField U1 = inverse_laplacian(Field(g, h1));
    CHECK(U1.defect < 1e-10);

    const double a = 0.7, b = -1.9;
    std::vector<double> mix(g.N);
    for (std::size_t i = 0; i < g.N; ++i) mix[i] = a * h1[i] + b * h2[i];
    const std::vector<double> Um = inverse_laplacian(g, mix);
    const std::vector<double> U2 = inverse_laplacian(g, h2);
    for (std::size_t i = 0; i < g.N; ++i)
      CHECK(std::abs(Um[i] - (a * U1.U[i] + b * U2[i])) < 1e-12 * (1.0 + std::abs(Um[i])));

    const double hmax = std::abs(*std::max_element(h1.begin(), h1.end(), [](double x, double y) {
      return std::abs(x) < std::abs(y);
    }));
    for (double u : U1.U.values) CHECK(std::abs(u) <= green * hmax);
  }
  std::vector<double> bad(g.N, 0.0);
  bad[3] = NAN;
  CHECK_THROWS_AS(inverse_laplacian(g, bad), std::invalid_argument);
}

TEST_CASE("dual residual of a stationary trajectory vanishes") {
  const Grid1D g(-2.0, 2.0, 64);
  const CellFlux cf = CellFlux::oscillating(flux_presets::stefan(), g, 0.125);
  const Field phi0 = stationary_profile(cf, 0.0);
  SolveOptions o;
  o.T = 0.05;
  o.dt = 5e-3;
  const Trajectory tr = evolve(cf, phi0.values, 0.0, o);
  CHECK(dual_residual(tr, cf) < 1e-10);
}

TEST_CASE("dual residual of the heat equation is first order") {
  const auto run = [](std::size_t n, double dt) {
    const Flux heat = flux_presets::heat();
    const Grid1D g(0.0, 1.0, n);
    const CellFlux cf = CellFlux::oscillating(heat, g, 0.0);
    std::vector<double> u0(n);
    for (std::size_t i = 0; i < n; ++i) u0[i] = std::sin(pi * g.x(i));
    SolveOptions o;
    o.T = 0.1;
    o.dt = dt;
    const Trajectory tr = evolve(cf, u0, 0.0, o);
    const double r = dual_residual(tr, cf);
    CHECK(r <= g.dx() + dt);
    return r;
  };
  const double coarse = run(50, 2e-3);
  const double fine = run(100, 1e-3);
  // The centred difference misses the backward-Euler update by dt/2 * w_t.
  CHECK(coarse / fine == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("dual distance over the interior") {
  const Grid1D g(0.0, 1.0, 40);
  const std::vector<std::vector<double>> a = {std::vector<double>(40, 1.0)};
  const std::vector<std::vector<double>> b = {std::vector<double>(40, 0.0)};
  CHECK(dual_sup_distance(g, a, a) == 0.0);
  // U for h = 1 peaks at 1/8 in the middle of the unit interval.
  CHECK(dual_sup_distance(g, a, b) == doctest::Approx(0.125).epsilon(1e-3));
  CHECK_THROWS_AS(dual_sup_distance(g, a, {}), std::invalid_argument);
}
