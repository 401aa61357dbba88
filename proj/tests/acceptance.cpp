// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Every tolerance below is fixed; seeds are printed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "homog/algebra.hpp"
#include "homog/dual.hpp"
#include "homog/flux.hpp"
#include "homog/harness.hpp"
#include "homog/homogenized.hpp"
#include "homog/solver.hpp"

using namespace homog;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s,
               const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_s;
  const bool ok = v.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s %2d %s: %s; %.2f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              v.detail.c_str(), secs, limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.3g", v[i]);
  return s + "]";
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / static_cast<double>(n - 1);
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double stefan_fbar(double u) {
  if (u < -1.5) return u + 0.5;
  if (u > 1.5) return u - 0.5;
  return 2.0 * u / 3.0;
}

bool each_below(const std::vector<double>& v, double factor) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] <= factor * v[k - 1])) return false;
  return true;
}

// 1 ------------------------------------------------------------------------

Verdict stefan_flux() {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "homog_acceptance_fbar";
  std::ostringstream out, err;
  const int code = cli::run({"homogenize-flux", "--preset", "stefan", "--out", dir.string()},
                            out, err);
  if (code != 0) return {false, "homogenize-flux exited with " + std::to_string(code)};
  std::istringstream csv(slurp((dir / "fbar.csv").string()));
  std::filesystem::remove_all(dir);
  std::string line;
  std::size_t points = 0;
  double worst = 0.0;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    double x, u, f;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &u, &f) != 3) return {false, "bad row"};
    worst = std::max(worst, std::abs(f - stefan_fbar(u)));
    ++points;
  }
  const double tol = 1e-6;
  return {points == 400 && worst < tol,
          fmt("max |fbar - closed form| = %.2e (tol %.0e) over %zu points on [-4,4]", worst, tol,
              points)};
}

// 2 ------------------------------------------------------------------------

Verdict fixed_point() {
  const Flux slow = Flux::type1(
      "slow_linear", {0.0, 1.0}, {},
      [](double x, std::span<const double>, double u) { return (1.0 + x * x) * u; },
      [](double x, std::span<const double>, double v) { return v / (1.0 + x * x); }, {}, true);
  const std::vector<Flux> fluxes = {flux_presets::heat(), flux_presets::cubic(),
                                    flux_presets::pure_cubic(), slow};
  const double tol = 1e-10;
  double worst = 0.0;
  std::size_t probes = 0;
  for (const Flux& flux : fluxes) {
    const Interval d = flux.domain();
    const std::vector<double> xs = linspace(d.a, d.b, flux.x_dependent() ? 5 : 2);
    const HomogenizedFlux t = homogenized_f(flux, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const GbarSampling& s = t.samples_at(i);
      for (double u : s.gbar) {
        worst = std::max(worst, std::abs(t(xs[i], u) - flux.f(xs[i], {}, u)));
        ++probes;
      }
    }
  }
  return {worst < tol, fmt("max |fbar - f| = %.2e (tol %.0e) at %zu table abscissae of 4 "
                           "y-independent laws",
                           worst, tol, probes)};
}

// 3 ------------------------------------------------------------------------

Verdict heat_oracle() {
  const double T = 0.1, dt = 1e-4;
  std::vector<double> rel_error, amplitude;
  for (std::size_t n : {100u, 200u, 400u}) {
    const Grid1D g(0.0, 1.0, n);
    const CellFlux cf = CellFlux::oscillating(flux_presets::heat(), g, 0.0);
    std::vector<double> u0(n), mode(n);
    for (std::size_t i = 0; i < n; ++i) mode[i] = u0[i] = std::sin(pi * g.x(i));
    SolveOptions o;
    o.T = T;
    o.dt = dt;
    o.store_times = {T};
    const Trajectory tr = solve(cf, u0, o);
    double num = 0.0, den = 0.0, proj = 0.0, norm = 0.0;
    const double decay = std::exp(-pi * pi * tr.times.back());
    for (std::size_t i = 0; i < n; ++i) {
      const double exact = decay * mode[i];
      num += (tr.final()[i] - exact) * (tr.final()[i] - exact);
      den += exact * exact;
      proj += tr.final()[i] * mode[i];
      norm += mode[i] * mode[i];
    }
    rel_error.push_back(std::sqrt(num / den));
    amplitude.push_back(proj / norm);
  }
  // The time step is shared, so differences of the mode amplitudes carry
  // only the spatial error.
  const double order =
      std::log2(std::abs(amplitude[0] - amplitude[1]) / std::abs(amplitude[1] - amplitude[2]));
  return {rel_error[2] < 0.02 && order >= 1.8,
          fmt("relative L2 errors %s (tol 2e-2 at N=400); spatial Richardson order %.3f "
              "(min 1.8)",
              list(rel_error).c_str(), order)};
}

// 4 ------------------------------------------------------------------------

Verdict stationarity() {
  const Grid1D g(-2.0, 2.0, 128);
  const CellFlux cf = CellFlux::oscillating(flux_presets::stefan(), g, 0.125);
  const Field phi0 = stationary_profile(cf, 0.0);
  const double tol = 1e-8;
  double worst = 0.0;
  for (double sigma : {0.0, 1e-2}) {
    std::vector<double> u = phi0.values;
    for (int n = 0; n < 200; ++n) {
      u = step_implicit(cf, u, 1.0 / 64.0, sigma);
      for (std::size_t i = 0; i < g.N; ++i) worst = std::max(worst, std::abs(u[i] - phi0[i]));
    }
  }
  return {worst < tol,
          fmt("max drift of Phi_0 over 200 steps (sigma 0 and 1e-2) = %.2e (tol %.0e)", worst,
              tol)};
}

// 5 ------------------------------------------------------------------------

Verdict structure() {
  constexpr std::uint64_t seed = 20240501;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-2.0, 2.0), P(0.0, 1.0);
  const Grid1D g(-2.0, 2.0, 128);
  const CellFlux stefan = CellFlux::oscillating(flux_presets::stefan(), g, 0.125);
  const double dt = 2e-3;
  const auto random_field = [&](double lo, double hi) {
    std::vector<double> v(g.N);
    std::uniform_real_distribution<double> d(lo, hi);
    for (double& x : v) x = d(rng);
    return v;
  };

  // Comparison.
  std::size_t violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> a = random_field(-2.0, 2.0);
    std::vector<double> b = a;
    for (double& x : b) x += 1.5 * P(rng) * P(rng);
    violations += comparison_check(stefan, a, b, 0.05, dt, 0.0);
  }

  // Unweighted L1 contraction for x-independent laws.
  const std::vector<Flux> flat = {flux_presets::heat(), flux_presets::cubic(),
                                  flux_presets::pure_cubic(), flux_presets::stefan_flat()};
  double worst_increase = -INFINITY;
  for (int trial = 0; trial < 20; ++trial) {
    const CellFlux cf = CellFlux::oscillating(flat[trial % flat.size()], g, 0.0);
    std::vector<double> a = random_field(-2.0, 2.0), b = random_field(-2.0, 2.0);
    double d = l1_distance(g, a, b);
    for (int n = 0; n < 20; ++n) {
      a = step_implicit(cf, a, dt, 0.0);
      b = step_implicit(cf, b, dt, 0.0);
      const double next = l1_distance(g, a, b);
      worst_increase = std::max(worst_increase, next - d);
      d = next;
    }
  }

  // Weighted growth with C = Lipschitz constant * first eigenvalue.
  const double c_hat = inspect_flux(flux_presets::stefan()).lipschitz * g.eigenvalue();
  double worst_growth = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a = random_field(-2.0, 2.0), b = a;
    for (double& x : b) x += 0.5 * U(rng);
    const double d0 = weighted_l1_distance(g, a, b);
    for (int n = 1; n <= 25; ++n) {
      a = step_implicit(stefan, a, dt, 0.0);
      b = step_implicit(stefan, b, dt, 0.0);
      worst_growth =
          std::max(worst_growth, weighted_l1_distance(g, a, b) / (d0 * std::exp(c_hat * n * dt)));
    }
  }

  // Entropy inequalities: 11 constants k, 5 test functions, 4 random smooth data.
  const double T = 0.1;
  const std::vector<SpaceTimeFn> phis = default_test_functions({-2.0, 2.0}, T, 5, 0.5);
  const double C = 1.0;
  double worst_entropy = INFINITY;
  std::size_t entropy_checks = 0, entropy_failures = 0;
  for (int trial = 0; trial < 4; ++trial) {
    const double amp = 0.5 + 1.5 * P(rng), c = U(rng) * 0.5, w = 0.5 + P(rng), base = U(rng) * 0.5;
    std::vector<double> u0(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
      const double z = (g.x(i) - c) / w;
      u0[i] = base + (std::abs(z) < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0);
    }
    SolveOptions o;
    o.T = T;
    o.dt = dt;
    const Trajectory tr = evolve(stefan, u0, 0.0, o);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& level : tr.u)
      for (double x : level) lo = std::min(lo, x), hi = std::max(hi, x);
    for (double k : linspace(lo, hi, 11))
      for (const SpaceTimeFn& phi : phis) {
        const EntropyResidual r = kruzhkov_residual(tr, stefan, k, phi, C);
        worst_entropy = std::min(worst_entropy, r.value / r.tolerance);
        ++entropy_checks;
        if (!r.satisfied()) ++entropy_failures;
      }
  }

  const bool ok = violations == 0 && worst_increase < 1e-12 && worst_growth <= 1.0 + 1e-12 &&
                  entropy_failures == 0;
  return {ok, fmt("seed %llu; comparison violations %zu/20 trials; max per-step L1 increase "
                  "%.1e (tol 1e-12); max weighted distance / exp(C t) bound %.3f (C = %.3f); "
                  "entropy %zu/%zu satisfied, min residual / (dx+dt) = %.3g (C = 1)",
                  static_cast<unsigned long long>(seed), violations, worst_increase,
                  worst_growth, c_hat, entropy_checks - entropy_failures, entropy_checks,
                  worst_entropy * C)};
}

// 6 ------------------------------------------------------------------------

Verdict sigma_cauchy() {
  const Grid1D g(-2.0, 2.0, 128);
  const CellFlux cf = CellFlux::oscillating(flux_presets::stefan(), g, 0.125);
  const Scenario s = scenario_from_json(preset_config("stefan-wellprepared"));
  const std::vector<double> u0 = initial_cell_average(general_initial(s), g, 0.125);
  SolveOptions o;
  o.T = 0.5;
  o.dt = 1.0 / 64.0;
  o.sigma_schedule = {1e-2, 5e-3, 2.5e-3};
  o.cauchy_factor = 1.8;
  const Trajectory tr = solve(cf, u0, o);
  const CauchyRecord& c = tr.cauchy;
  return {c.passed && c.ratios.size() == 1 && c.ratios[0] >= 1.8,
          fmt("weighted distances %s at t = 0.5, ratio %.3f (min 1.8)",
              list(c.distances).c_str(), c.ratios.empty() ? 0.0 : c.ratios[0])};
}

// 7, 8 ---------------------------------------------------------------------

std::vector<double> finals(const EpsSweepReport& r, std::vector<double> EpsRecord::* field) {
  std::vector<double> v;
  for (const EpsRecord& rec : r.records) v.push_back((rec.*field).back());
  return v;
}

Verdict sweep_well_prepared() {
  const Scenario s = scenario_from_json(preset_config("stefan-wellprepared"));
  const EpsSweepReport r = run_sweep(s);
  const std::vector<double> corr = finals(r, &EpsRecord::corrector);
  const std::vector<double> weak = finals(r, &EpsRecord::weak_star);
  double order = NAN;
  for (const auto& [name, fit] : r.orders)
    if (name == "weak_star") order = fit.slope;
  const bool ok = each_below(corr, 0.9) && each_below(weak, 1.0) && order > 0.4;
  return {ok, fmt("eps %s; corrector L1 %s (each <= 0.9x previous); weak-star %s, fitted order "
                  "%.2f (min 0.4)",
                  list(s.epsilons).c_str(), list(corr).c_str(), list(weak).c_str(), order)};
}

Verdict sweep_general() {
  const Scenario s = scenario_from_json(preset_config("stefan-general"));
  const EpsSweepReport r = run_sweep(s);
  const std::vector<double> weak = finals(r, &EpsRecord::weak_star);
  const std::vector<double> dual = uniform_dual_convergence(r);
  const double C = 1.0;
  double worst = 0.0;
  for (const EpsRecord& rec : r.records)
    for (double d : rec.dual_residual) worst = std::max(worst, d / (rec.dx + r.dt));
  bool strictly = true;
  for (std::size_t k = 1; k < dual.size(); ++k) strictly = strictly && dual[k] < dual[k - 1];
  const bool ok = each_below(weak, 0.9) && strictly && worst <= C;
  return {ok, fmt("weak-star %s (each <= 0.9x previous); sup |U_eps - U| %s (decreasing); "
                  "max dual residual / (dx+dt) = %.3f (C = 1)",
                  list(weak).c_str(), list(dual).c_str(), worst)};
}

// 9 ------------------------------------------------------------------------

Verdict level_sets() {
  const AlgebraFn psi0 = presets::stefan_psi0();
  double worst = 0.0;
  for (double alpha : linspace(-1.0, 1.0, 41))
    worst = std::max(worst, level_set_measure(psi0, alpha).extrapolated);
  const double plateau = level_set_measure(presets::clamped_psi0(), 0.5).extrapolated;
  const RegularityCertificate zero = strongly_regular(presets::sin2pi(), 0.0);
  const RegularityCertificate top = strongly_regular(presets::sin2pi(), 1.0);
  const bool ok = worst < 1e-3 && std::abs(plateau - 0.25) <= 0.02 && zero.certified &&
                  !top.certified;
  return {ok, fmt("psi0 max extrapolated measure over 41 alphas %.1e (tol 1e-3); clamped "
                  "plateau mass %.4f (0.25 +- 0.02); sin(2 pi y) certified at 0: %s (margin "
                  "%.3g), at 1: %s (margin %.1e)",
                  worst, plateau, zero.certified ? "yes" : "no", zero.margin,
                  top.certified ? "yes" : "no", top.margin)};
}

// 10 -----------------------------------------------------------------------

Verdict convexity() {
  constexpr std::uint64_t seed = 77;
  const Flux f = flux_presets::stefan();
  const std::vector<double> xs = {0.0};
  const HomogenizedFlux t = homogenized_f(f, xs);
  const double min_slope = t.gbar_at(0).min_segment_slope();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> V(-3.0, 3.0), Th(0.0, 1.0);
  const double slack = 1e-9;
  std::size_t violations = 0;
  double worst = INFINITY;
  for (int k = 0; k < 1000; ++k) {
    double v1 = V(rng), v2 = V(rng);
    if (v1 > v2) std::swap(v1, v2);
    double theta = Th(rng);
    if (v1 == v2 || theta == 0.0) continue;
    const double gap = convexity_gap(f, 0.0, v1, v2, theta);
    const double bound = convexity_bound(min_slope, v1, v2, theta);
    worst = std::min(worst, gap - bound);
    if (gap < bound - slack) ++violations;
  }
  return {violations == 0,
          fmt("seed %llu; C = %.4f; %zu violations in 1000 triples; min gap - bound = %.2e "
              "(slack %.0e)",
              static_cast<unsigned long long>(seed), 0.5 * min_slope, violations, worst, slack)};
}

}  // namespace

int main() {
  criterion(1, "stefan homogenized flux", 5, stefan_flux);
  criterion(2, "fixed point of y-independent laws", 1, fixed_point);
  criterion(3, "heat oracle", 60, heat_oracle);
  criterion(4, "stationary profile", 30, stationarity);
  criterion(5, "structure suite", 300, structure);
  criterion(6, "sigma continuation", 300, sigma_cauchy);
  criterion(7, "well-prepared sweep", 1800, sweep_well_prepared);
  criterion(8, "general-data sweep", 1800, sweep_general);
  criterion(9, "level-set estimator", 120, level_sets);
  criterion(10, "convexity gap", 60, convexity);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
