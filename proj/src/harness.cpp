#include "homog/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "homog/dual.hpp"
#include "homog/errors.hpp"
#include "homog/quadrature.hpp"

namespace homog {
namespace {

using json = nlohmann::json;

double bump(double z) { return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0; }

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// exp(-18 z^2) times a cutoff equal to 1 on |z| <= 5/6 and 0 on |z| >= 1.
double gaussian_bump(double z) {
  const double r = std::abs(z);
  return std::exp(-18.0 * z * z) * (1.0 - smooth_step(6.0 * r - 5.0));
}

double flux_period(const Flux& flux) {
  double period = 1.0;
  for (const AlgebraFn& c : flux.coefficients())
    if (const auto* p = std::get_if<Periodic>(&c.kind())) period = std::max(period, p->period[0]);
  return period;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty list");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

InitialData initial_from_json(const json& spec, const Flux& flux, const Interval& omega,
                              json& canonical) {
  check_keys(spec, "initial", {"kind", "params"});
  if (!spec.contains("kind") || !spec.at("kind").is_string())
    throw ConfigError("initial: 'kind' must be a string");
  const std::string kind = spec.at("kind").get<std::string>();
  const json params = spec.value("params", json::object());
  if (!params.is_object()) throw ConfigError("initial.params: expected an object");
  const std::string profile = params.value("profile", "");
  const double mid = 0.5 * (omega.a + omega.b);
  const double half = 0.5 * omega.length();
  canonical = {{"kind", kind}, {"params", {{"profile", profile}}}};

  if (kind == "well_prepared") {
    if (profile == "constant") {
      check_keys(params, "initial.params", {"profile", "value"});
      const double c = number(params, "value", "initial.params");
      canonical["params"]["value"] = c;
      return WellPrepared{[c](double) { return c; }};
    }
    if (profile == "truncated_cosine") {
      check_keys(params, "initial.params", {"profile", "amplitude"});
      const double A = number_or(params, "amplitude", 0.5, "initial.params");
      canonical["params"]["amplitude"] = A;
      return WellPrepared{[A, mid, half](double x) {
        const double z = (x - mid) / half;
        return std::max(0.0, A * std::cos(std::numbers::pi * z) * (1.0 - std::abs(z)));
      }};
    }
    if (profile == "sine") {
      check_keys(params, "initial.params", {"profile", "amplitude"});
      const double A = number_or(params, "amplitude", 1.0, "initial.params");
      canonical["params"]["amplitude"] = A;
      const double a = omega.a, L = omega.length();
      return WellPrepared{
          [A, a, L](double x) { return A * std::sin(std::numbers::pi * (x - a) / L); }};
    }
    throw ConfigError("initial.params: unknown well_prepared profile '" + profile + "'");
  }

  if (kind == "general") {
    if (profile != "jump_cosine_bump")
      throw ConfigError("initial.params: unknown general profile '" + profile + "'");
    check_keys(params, "initial.params", {"profile", "amplitude", "period", "radius"});
    const Type2Law* law = flux.type2_law();
    if (law == nullptr)
      throw ConfigError("initial: jump_cosine_bump needs a type-2 flux for its inverse");
    const double A = number_or(params, "amplitude", 0.3, "initial.params");
    const double P = number_or(params, "period", 4.0, "initial.params");
    const double r = number_or(params, "radius", 1.5, "initial.params");
    if (!(P > 0.0) || !(r > 0.0))
      throw ConfigError("initial.params: period and radius must be positive");
    canonical["params"]["amplitude"] = A;
    canonical["params"]["period"] = P;
    canonical["params"]["radius"] = r;
    const MonotoneProfile G = law->G;
    General g;
    g.coefficients = {presets::cosine(A, P)};
    g.rule = [G, mid, r](double x, std::span<const double> c) {
      return G(c[0]) * bump((x - mid) / r);
    };
    const std::vector<double> jumps = law->jumps;
    g.switches = [jumps](double) {
      std::vector<CoefficientSwitch> sw;
      for (double j : jumps) sw.push_back([j](std::span<const double> c) { return c[0] - j; });
      return sw;
    };
    return g;
  }
  throw ConfigError("initial: unknown kind '" + kind + "'");
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

General well_prepared_initial(const Flux& flux, std::function<double(double)> phi0) {
  General g;
  g.coefficients.assign(flux.coefficients().begin(), flux.coefficients().end());
  auto shared = std::make_shared<const Flux>(flux);
  g.rule = [shared, phi0](double x, std::span<const double> c) {
    return shared->g(x, c, phi0(x));
  };
  g.switches = [shared, phi0](double x) { return jump_switches(*shared, x, phi0(x)); };
  return g;
}

Field initial_mean(const General& u0, const Grid1D& grid, const MeanOptions& opts) {
  std::vector<double> out(grid.N);
  for (std::size_t i = 0; i < grid.N; ++i) {
    const double x = grid.x(i);
    const auto map = [&](std::span<const double> c) { return u0.rule(x, c); };
    if (u0.coefficients.empty()) {
      out[i] = u0.rule(x, {});
      continue;
    }
    const std::vector<CoefficientSwitch> sw =
        u0.switches ? u0.switches(x) : std::vector<CoefficientSwitch>{};
    out[i] = compose_mean(u0.coefficients, map, sw, opts);
  }
  return Field(grid, std::move(out));
}

std::vector<double> initial_cell_average(const General& u0, const Grid1D& grid, double eps) {
  std::vector<double> out(grid.N);
  const double dx = grid.dx();
  quad::Options q;
  q.abs_tol = 1e-12;
  q.switch_samples = 64;
  const auto coefficients = [&](double x) {
    std::vector<double> c;
    for (const AlgebraFn& fn : u0.coefficients) c.push_back(fn(x / eps));
    return c;
  };
  const std::size_t jumps =
      u0.switches && !u0.coefficients.empty() ? u0.switches(grid.x(0)).size() : 0;
  std::vector<quad::Switch> sw;
  for (std::size_t k = 0; k < jumps; ++k)
    sw.push_back([&, k](double x) { return u0.switches(x)[k](coefficients(x)); });
  const auto density = [&](double x) { return u0.rule(x, coefficients(x)); };
  for (std::size_t i = 0; i < grid.N; ++i) {
    const double lo = grid.a + static_cast<double>(i) * dx;
    out[i] = quad::integrate_piecewise(density, lo, lo + dx, sw, q).value / dx;
  }
  return out;
}

Scenario scenario_from_json(const json& config) {
  check_keys(config, "config",
             {"flux", "omega", "T", "initial", "epsilons", "cells_per_period", "dt_factor",
              "tests", "sigmas"});
  for (const char* key : {"flux", "omega", "T", "initial", "epsilons"})
    if (!config.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  Scenario s;
  json record;

  check_keys(config.at("omega"), "omega", {"a", "b"});
  s.omega = {number(config.at("omega"), "a", "omega"), number(config.at("omega"), "b", "omega")};
  if (!(s.omega.b > s.omega.a)) throw ConfigError("omega: need a < b");
  record["omega"] = {{"a", s.omega.a}, {"b", s.omega.b}};

  json flux_spec = config.at("flux");
  if (flux_spec.is_object() && !flux_spec.contains("domain"))
    flux_spec["domain"] = {s.omega.a, s.omega.b};
  s.flux = flux_presets::from_json(flux_spec);
  record["flux"] = flux_spec;

  s.T = number(config, "T", "config");
  if (!(s.T > 0.0)) throw ConfigError("T: must be positive");
  record["T"] = s.T;

  json initial_record;
  s.initial = initial_from_json(config.at("initial"), s.flux, s.omega, initial_record);
  record["initial"] = initial_record;

  s.epsilons = number_list(config.at("epsilons"), "epsilons");
  for (std::size_t k = 0; k < s.epsilons.size(); ++k)
    if (!(s.epsilons[k] > 0.0) || (k > 0 && !(s.epsilons[k] < s.epsilons[k - 1])))
      throw ConfigError("epsilons: must be positive and strictly decreasing");
  record["epsilons"] = s.epsilons;

  if (config.contains("cells_per_period")) {
    const json& c = config.at("cells_per_period");
    if (!c.is_number_integer() || c.get<long long>() < 2)
      throw ConfigError("cells_per_period: expected an integer >= 2");
    s.cells_per_period = c.get<std::size_t>();
  }
  record["cells_per_period"] = s.cells_per_period;
  s.dt_factor = number_or(config, "dt_factor", s.dt_factor, "config");
  if (!(s.dt_factor > 0.0)) throw ConfigError("dt_factor: must be positive");
  record["dt_factor"] = s.dt_factor;

  if (config.contains("tests")) {
    const json& t = config.at("tests");
    check_keys(t, "tests", {"count", "width"});
    if (t.contains("count")) {
      if (!t.at("count").is_number_integer() || t.at("count").get<long long>() < 1)
        throw ConfigError("tests.count: expected a positive integer");
      s.test_count = t.at("count").get<std::size_t>();
    }
    s.test_width = number_or(t, "width", s.test_width, "tests");
    if (!(s.test_width > 0.0)) throw ConfigError("tests.width: must be positive");
  }
  record["tests"] = {{"count", s.test_count}, {"width", s.test_width}};

  if (config.contains("sigmas")) {
    s.sigmas = number_list(config.at("sigmas"), "sigmas");
    if (s.sigmas.size() < 3) throw ConfigError("sigmas: need at least three levels");
    for (std::size_t k = 0; k < s.sigmas.size(); ++k)
      if (!(s.sigmas[k] > 0.0) || (k > 0 && !(s.sigmas[k] < s.sigmas[k - 1])))
        throw ConfigError("sigmas: must be positive and strictly decreasing");
  }
  record["sigmas"] = s.sigmas;
  s.record = record;
  return s;
}

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << line_of(text, e.byte == 0 ? 0 : e.byte - 1) << ": " << e.what();
    throw ConfigError(msg.str());
  }
}

Scenario scenario_from_text(const std::string& text) {
  return scenario_from_json(parse_config(text));
}

General general_initial(const Scenario& s) {
  if (const General* g = std::get_if<General>(&s.initial)) return *g;
  return well_prepared_initial(s.flux, std::get<WellPrepared>(s.initial).phi0);
}

json preset_config(const std::string& name) {
  json c = {{"flux", {{"preset", "stefan"}}},
            {"omega", {{"a", -2.0}, {"b", 2.0}}},
            {"T", 0.5},
            {"epsilons", {0.25, 0.125, 0.0625, 0.03125}},
            {"cells_per_period", 16},
            {"dt_factor", 0.5},
            {"tests", {{"count", 5}, {"width", 0.5}}}};
  if (name == "stefan-wellprepared") {
    c["initial"] = {{"kind", "well_prepared"},
                    {"params", {{"profile", "truncated_cosine"}, {"amplitude", 0.5}}}};
    return c;
  }
  if (name == "stefan-general") {
    c["initial"] = {{"kind", "general"},
                    {"params",
                     {{"profile", "jump_cosine_bump"},
                      {"amplitude", 0.3},
                      {"period", 4.0},
                      {"radius", 1.5}}}};
    return c;
  }
  throw ConfigError("unknown scenario preset '" + name + "'");
}

std::vector<std::string> scenario_presets() { return {"stefan-wellprepared", "stefan-general"}; }

std::vector<SpaceTimeFn> default_test_functions(const Interval& omega, double T,
                                                std::size_t count, double width) {
  std::vector<SpaceTimeFn> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double c =
        omega.a + omega.length() * static_cast<double>(k + 1) / static_cast<double>(count + 1);
    out.push_back([c, width, T](double x, double t) {
      return gaussian_bump((x - c) / width) * bump((t - 0.5 * T) / (0.5 * T));
    });
  }
  return out;
}

Grid1D grid_for(const Scenario& s, double eps) {
  const double dx = eps * flux_period(s.flux) / static_cast<double>(s.cells_per_period);
  const double cells = s.omega.length() / dx;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * cells) {
    std::ostringstream msg;
    msg << "eps = " << eps << ": cells of width " << dx << " do not tile the domain";
    throw ResolutionTooCoarse(msg.str());
  }
  return Grid1D(s.omega.a, s.omega.b, std::max<std::size_t>(8, static_cast<std::size_t>(rounded)));
}

std::vector<double> restrict_to(const Grid1D& fine, std::span<const double> u,
                                const Grid1D& coarse) {
  if (fine.N % coarse.N != 0 || fine.a != coarse.a || fine.b != coarse.b)
    throw std::invalid_argument("restrict_to: grids are not nested");
  const std::size_t r = fine.N / coarse.N;
  std::vector<double> out(coarse.N);
  for (std::size_t i = 0; i < coarse.N; ++i)
    out[i] = quad::pairwise_sum(u.subspan(i * r, r)) / static_cast<double>(r);
  return out;
}

double weak_star_error(const Trajectory& u, const std::vector<std::vector<double>>& ubar,
                       std::span<const SpaceTimeFn> tests, double t_max) {
  if (tests.empty()) throw std::invalid_argument("weak_star_error: empty test set");
  if (ubar.size() != u.levels()) throw std::invalid_argument("weak_star_error: level mismatch");
  const Grid1D& g = u.grid;
  double worst = 0.0;
  for (const SpaceTimeFn& phi : tests) {
    std::vector<double> levels;
    for (std::size_t n = 1; n < u.levels() && u.times[n] <= t_max + 1e-12; ++n) {
      const double dt = u.times[n] - u.times[n - 1];
      std::vector<double> terms(g.N);
      for (std::size_t i = 0; i < g.N; ++i)
        terms[i] = (u.u[n][i] - ubar[n][i]) * phi(g.x(i), u.times[n]);
      levels.push_back(quad::pairwise_sum(terms) * g.dx() * dt);
    }
    worst = std::max(worst, std::abs(quad::pairwise_sum(levels)));
  }
  return worst;
}

double corrector_error(const Trajectory& u, const std::vector<std::vector<double>>& ubar,
                       const CellFlux& cells, const HomogenizedFlux& fbar, double t_min,
                       double t_max, double interior) {
  if (ubar.size() != u.levels()) throw std::invalid_argument("corrector_error: level mismatch");
  const Grid1D& g = u.grid;
  const double margin = 0.5 * (1.0 - interior) * (g.b - g.a);
  std::vector<double> levels;
  for (std::size_t n = 1; n < u.levels(); ++n) {
    const double t = u.times[n];
    if (t < t_min - 1e-12 || t > t_max + 1e-12) continue;
    const double dt = u.times[n] - u.times[n - 1];
    std::vector<double> terms;
    for (std::size_t i = 0; i < g.N; ++i) {
      const double x = g.x(i);
      if (x < g.a + margin || x > g.b - margin) continue;
      terms.push_back(std::abs(u.u[n][i] - cells.g(i, fbar(x, ubar[n][i]))));
    }
    levels.push_back(quad::pairwise_sum(terms) * g.dx() * dt);
  }
  return quad::pairwise_sum(levels);
}

OrderFit estimate_order(std::span<const double> eps, std::span<const double> errors) {
  if (eps.size() != errors.size() || eps.size() < 3)
    throw std::invalid_argument("estimate_order: need at least three points");
  const std::size_t n = eps.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(eps[k] > 0.0) || !(errors[k] > 0.0))
      throw std::invalid_argument("estimate_order: values must be positive");
    lx[k] = std::log(eps[k]);
    ly[k] = std::log(errors[k]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) mx += lx[k], my += ly[k];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  OrderFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = ly[k] - my - fit.slope * (lx[k] - mx);
    ssr += r * r;
  }
  fit.std_error = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

EpsSweepReport run_sweep(const Scenario& s, const SweepOptions& opts) {
  if (s.epsilons.empty()) throw std::invalid_argument("run_sweep: no scales");
  std::vector<Grid1D> grids;
  for (double eps : s.epsilons) grids.push_back(grid_for(s, eps));
  Grid1D fine = grids.front();
  for (const Grid1D& g : grids)
    if (g.N > fine.N) fine = g;
  for (const Grid1D& g : grids)
    if (fine.N % g.N != 0)
      throw ResolutionTooCoarse("run_sweep: scale grids do not nest in the finest grid");

  EpsSweepReport report;
  report.dt = s.dt_factor * fine.dx();

  std::vector<double> xs;
  if (s.flux.x_dependent()) {
    for (int k = 0; k <= 16; ++k) xs.push_back(s.omega.a + s.omega.length() * k / 16.0);
  } else {
    xs.push_back(0.5 * (s.omega.a + s.omega.b));
  }
  report.fbar = std::make_shared<const HomogenizedFlux>(
      homogenized_f(s.flux, xs, opts.homogenization));

  const General u0 = general_initial(s);
  const Field ubar0 = initial_mean(u0, fine);
  const CellFlux homogenized = CellFlux::homogenized(report.fbar, fine);
  SolveOptions base;
  base.T = s.T;
  base.dt = report.dt;
  base.sigma_schedule = s.sigmas;
  base.step = opts.step;
  report.homogenized = solve(homogenized, ubar0.values, base);

  const std::vector<double> marks = {0.25 * s.T, 0.5 * s.T, s.T};
  const std::vector<SpaceTimeFn> tests =
      default_test_functions(s.omega, s.T, s.test_count, s.test_width);
  report.records.resize(s.epsilons.size());
  std::vector<std::exception_ptr> failures(s.epsilons.size());

  const auto run_one = [&](std::size_t k) {
    const auto start = std::chrono::steady_clock::now();
    const double eps = s.epsilons[k];
    const Grid1D& g = grids[k];
    EpsRecord& rec = report.records[k];
    rec.eps = eps;
    rec.cells = g.N;
    rec.dx = g.dx();
    const CellFlux cells = CellFlux::oscillating(s.flux, g, eps, Sampling::CellAverage, opts.cells);
    const std::vector<double> u0_eps = initial_cell_average(u0, g, eps);
    const Trajectory traj = solve(cells, u0_eps, base);
    rec.sigma = traj.sigma;
    rec.cauchy_distances = traj.cauchy.distances;
    std::vector<std::vector<double>> ubar;
    for (const std::vector<double>& level : report.homogenized.u)
      ubar.push_back(restrict_to(fine, level, g));
    for (double t : marks) {
      rec.times.push_back(t);
      rec.weak_star.push_back(weak_star_error(traj, ubar, tests, t));
      rec.corrector.push_back(corrector_error(traj, ubar, cells, *report.fbar, 0.1 * s.T, t));
      rec.dual_residual.push_back(dual_residual(traj, cells, t));
    }
    rec.uniform_dual = dual_sup_distance(g, traj.u, ubar);
    rec.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  const std::size_t threads =
      std::max<std::size_t>(1, opts.max_threads == 0 ? s.epsilons.size()
                                                     : std::min(opts.max_threads, s.epsilons.size()));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < s.epsilons.size(); k = next++) {
        try {
          run_one(k);
        } catch (...) {
          failures[k] = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : failures)
    if (e) std::rethrow_exception(e);

  if (s.epsilons.size() >= 3) {
    std::vector<double> ws, cs, ds, us;
    for (const EpsRecord& r : report.records) {
      ws.push_back(r.weak_star.back());
      cs.push_back(r.corrector.back());
      ds.push_back(r.dual_residual.back());
      us.push_back(r.uniform_dual);
    }
    const auto add = [&](const std::string& name, const std::vector<double>& v) {
      if (std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; }))
        report.orders.emplace_back(name, estimate_order(s.epsilons, v));
    };
    add("weak_star", ws);
    add("corrector_l1", cs);
    add("dual_residual", ds);
    add("uniform_dual", us);
  }
  return report;
}

std::vector<double> uniform_dual_convergence(const EpsSweepReport& report) {
  std::vector<double> out;
  for (const EpsRecord& r : report.records) out.push_back(r.uniform_dual);
  return out;
}

std::string sweep_csv(const EpsSweepReport& report, bool timing) {
  std::ostringstream out;
  out.precision(10);
  out << "eps,t,weak_star,corrector_l1,dual_residual,runtime_s\n";
  for (const EpsRecord& r : report.records)
    for (std::size_t m = 0; m < r.times.size(); ++m)
      out << r.eps << ',' << r.times[m] << ',' << r.weak_star[m] << ',' << r.corrector[m]
          << ',' << r.dual_residual[m] << ',' << (timing ? r.runtime_s : 0.0) << '\n';
  return out.str();
}

std::string orders_csv(const EpsSweepReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "metric,slope,stderr,points\n";
  for (const auto& [name, fit] : report.orders)
    out << name << ',' << fit.slope << ',' << fit.std_error << ',' << fit.points << '\n';
  return out.str();
}

}  // namespace homog
