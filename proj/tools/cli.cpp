#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "homog/algebra.hpp"
#include "homog/errors.hpp"
#include "homog/flux.hpp"
#include "homog/harness.hpp"
#include "homog/homogenized.hpp"
#include "homog/solver.hpp"

namespace homog::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string preset;
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::size_t max_threads = 0;
  bool timing = false;
  double tol_newton = StepOptions{}.tol;
  double tol_em0 = HomogenizedFluxOptions{}.em0_tol;
  double tol_quad = quad::Options{}.abs_tol;
  double tol_regular = RegularityOptions{}.floor;
};

struct LevelsetArgs {
  double alpha_min = -1.0;
  double alpha_max = 1.0;
  std::size_t alpha_count = 41;
  std::vector<double> schedule;
};

struct SolveArgs {
  std::optional<double> eps;
  bool homogenized = false;
};

void add_common(CLI::App* cmd, Common& c, bool threads, bool timing) {
  cmd->add_option("--preset", c.preset, "named preset");
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "seed recorded in every output header")
      ->capture_default_str();
  if (threads) cmd->add_option("--max-threads", c.max_threads, "0: one thread per scale");
  if (timing) cmd->add_flag("--timing", c.timing, "write measured runtimes instead of 0");
  cmd->add_option("--tol-newton", c.tol_newton, "nonlinear residual tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-em0", c.tol_em0, "largest accepted level-set mass")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-quad", c.tol_quad, "absolute quadrature tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-regular", c.tol_regular, "strong regularity floor")
      ->check(CLI::PositiveNumber);
  cmd->get_option("--preset")->excludes("--config");
}

json tolerances(const Common& c) {
  return {{"newton", c.tol_newton},
          {"em0", c.tol_em0},
          {"quad", c.tol_quad},
          {"regular", c.tol_regular}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_))
      throw ConfigError("output directory '" + dir + "' is not writable");
  }

  fs::path write(const std::string& name, const std::string& body) const {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    f << body;
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return p;
  }

 private:
  fs::path dir_;
};

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

json flux_spec(const Common& c) {
  if (!c.config.empty()) return parse_config(read_file(c.config));
  return {{"preset", c.preset.empty() ? "stefan" : c.preset}};
}

MeanOptions mean_options(const Common& c) {
  MeanOptions m;
  m.quadrature.abs_tol = c.tol_quad;
  return m;
}

HomogenizedFluxOptions homogenization_options(const Common& c) {
  HomogenizedFluxOptions h;
  h.em0_tol = c.tol_em0;
  h.mean = mean_options(c);
  return h;
}

json scenario_config(const Common& c) {
  if (!c.config.empty()) return parse_config(read_file(c.config));
  const std::string name = c.preset.empty() ? "stefan-wellprepared" : c.preset;
  const std::vector<std::string> known = scenario_presets();
  if (std::find(known.begin(), known.end(), name) == known.end())
    throw ConfigError("unknown scenario preset '" + name + "'");
  return preset_config(name);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}

std::string em0_csv(const std::vector<Em0Entry>& entries) {
  std::ostringstream s;
  s << "alpha,x,v,mass,converged\n";
  for (const Em0Entry& e : entries)
    s << number(e.alpha) << ',' << number(e.x) << ',' << number(e.v) << ','
      << number(e.mass) << ',' << (e.converged ? 1 : 0) << '\n';
  return s.str();
}

int homogenize_flux(const Common& c, std::ostream& out) {
  const json spec = flux_spec(c);
  const Flux flux = flux_presets::from_json(spec);
  const std::vector<double> us = linspace(-4.0, 4.0, 400);
  const json record = {{"flux", spec},
                       {"u_grid", {{"lo", -4.0}, {"hi", 4.0}, {"count", us.size()}}},
                       {"tolerances", tolerances(c)}};
  const std::string head = header_comment("homogenize-flux", record, c.seed);
  const Output dir(c.out);

  const Interval d = flux.domain();
  const std::vector<double> xs =
      flux.x_dependent() ? linspace(d.a, d.b, 17)
                         : std::vector<double>{0.5 * (d.a + d.b)};
  try {
    const HomogenizedFlux fbar = homogenized_f(flux, xs, homogenization_options(c));
    dir.write("fbar.csv", head + "# " + fbar.header().dump() + "\n" + fbar.to_csv(us));
    dir.write("em0_report.csv", head + em0_csv(fbar.em0_report()));
    out << "fbar: " << flux.id() << ", " << xs.size() << " x-points, slopes ["
        << fbar.min_slope() << ", " << fbar.max_slope() << "]\n";
    return kOk;
  } catch (const Em0Violation& e) {
    Em0Entry bad{e.alpha(), e.x(), e.v(), e.mass(), true};
    dir.write("em0_report.csv", head + "# violation: " + e.what() + "\n" + em0_csv({bad}));
    throw;
  }
}

int validate(const Common& c, std::ostream& out) {
  const json spec = flux_spec(c);
  const Flux flux = flux_presets::from_json(spec);
  const ValidationOptions vo{};
  const json record = {{"flux", spec},
                       {"u_range", {vo.u_lo, vo.u_hi}},
                       {"resolution", vo.resolution},
                       {"tolerances", tolerances(c)}};
  const std::string head = header_comment("validate-flux", record, c.seed);
  const FluxReport report = inspect_flux(flux, vo);
  std::ostringstream body;
  body << "clause,value,passed\n";
  const auto failed = [&](const std::string& clause) {
    return std::find(report.failures.begin(), report.failures.end(), clause) !=
           report.failures.end();
  };
  body << "monotonicity_violations," << report.monotonicity_violations << ','
       << (failed("monotonicity") ? 0 : 1) << '\n';
  body << "lipschitz," << number(report.lipschitz) << ',' << (failed("lipschitz") ? 0 : 1)
       << '\n';
  body << "min_h," << number(report.min_h) << ',' << (failed("h-floor") ? 0 : 1) << '\n';
  body << "max_boundary_pressure," << number(report.max_boundary_pressure) << ','
       << (failed("boundary-pressure") ? 0 : 1) << '\n';
  body << "witness_hi," << number(report.witness_hi) << ',' << (report.coercive ? 1 : 0) << '\n';
  body << "witness_lo," << number(report.witness_lo) << ',' << (report.coercive ? 1 : 0) << '\n';
  body << "fbar_lipschitz_bound," << number(report.fbar_lipschitz_bound) << ",1\n";
  for (const std::string& f : report.failures) body << "# failed: " << f << '\n';
  Output(c.out).write("validation.csv", head + body.str());
  if (!report.passed()) {
    std::string clauses;
    for (const std::string& f : report.failures) clauses += (clauses.empty() ? "" : ", ") + f;
    throw ValidationFailure("flux '" + flux.id() + "' violates: " + clauses, report.failures);
  }
  out << "flux " << flux.id() << " passed; Lipschitz constant " << report.lipschitz << '\n';
  return kOk;
}

SweepOptions sweep_options(const Common& c) {
  SweepOptions o;
  o.max_threads = c.max_threads;
  o.homogenization = homogenization_options(c);
  o.step.tol = c.tol_newton;
  return o;
}

int sweep(const Common& c, std::ostream& out) {
  const Scenario s = scenario_from_json(scenario_config(c));
  const json record = {{"scenario", s.record}, {"tolerances", tolerances(c)}};
  const std::string head = header_comment("sweep", record, c.seed);
  const Output dir(c.out);
  const EpsSweepReport report = run_sweep(s, sweep_options(c));

  dir.write("sweep.csv", head + sweep_csv(report, c.timing));
  dir.write("orders.csv", head + orders_csv(report));
  json scales = json::array();
  for (const EpsRecord& r : report.records)
    scales.push_back({{"eps", r.eps},
                      {"cells", r.cells},
                      {"dx", r.dx},
                      {"sigma", r.sigma},
                      {"sigma_cauchy_distances", r.cauchy_distances},
                      {"uniform_dual", r.uniform_dual}});
  const json manifest = {{"header", head.substr(2, head.size() - 3)},
                         {"version", kVersion},
                         {"command", "sweep"},
                         {"seed", c.seed},
                         {"config", s.record},
                         {"tolerances", tolerances(c)},
                         {"dt", report.dt},
                         {"homogenized_cells", report.homogenized.grid.N},
                         {"fbar", report.fbar->header()},
                         {"scales", scales},
                         {"timing", c.timing}};
  dir.write("manifest.json", manifest.dump(2) + "\n");
  for (const auto& [name, fit] : report.orders)
    out << name << ": order " << fit.slope << " +- " << fit.std_error << '\n';
  return kOk;
}

int solve_cmd(const Common& c, const SolveArgs& a, std::ostream& out) {
  const Scenario s = scenario_from_json(scenario_config(c));
  const double eps = a.eps.value_or(s.epsilons.back());
  if (!(eps > 0.0)) throw ConfigError("--eps must be positive");
  json record = {{"scenario", s.record},
                 {"eps", eps},
                 {"homogenized", a.homogenized},
                 {"tolerances", tolerances(c)}};
  const std::string head = header_comment("solve", record, c.seed);
  const Output dir(c.out);

  const Grid1D grid = grid_for(s, eps);
  const General u0 = general_initial(s);
  SolveOptions o;
  o.T = s.T;
  o.dt = s.dt_factor * grid.dx();
  o.sigma_schedule = s.sigmas;
  o.store_times = {0.25 * s.T, 0.5 * s.T};
  o.step.tol = c.tol_newton;

  std::optional<CellFlux> cells;
  std::vector<double> initial;
  if (a.homogenized) {
    const Interval d = s.omega;
    const std::vector<double> xs = s.flux.x_dependent()
                                       ? linspace(d.a, d.b, 17)
                                       : std::vector<double>{0.5 * (d.a + d.b)};
    auto fbar = std::make_shared<const HomogenizedFlux>(
        homogenized_f(s.flux, xs, homogenization_options(c)));
    cells = CellFlux::homogenized(fbar, grid);
    initial = initial_mean(u0, grid, mean_options(c)).values;
  } else {
    cells = CellFlux::oscillating(s.flux, grid, eps, Sampling::CellAverage);
    initial = initial_cell_average(u0, grid, eps);
  }
  const Trajectory traj = solve(*cells, initial, o);
  const json meta = {{"N", grid.N},
                     {"dt", traj.dt},
                     {"sigma", traj.sigma},
                     {"sigma_schedule", cells->type() == 2 ? json(s.sigmas) : json::array()},
                     {"sigma_cauchy_distances", traj.cauchy.distances},
                     {"flux", traj.flux_id}};
  dir.write("trajectory.csv", head + "# " + meta.dump() + "\n" + trajectory_csv(traj, *cells));
  out << "solved " << traj.flux_id << " on " << grid.N << " cells, " << traj.times.size()
      << " stored levels\n";
  return kOk;
}

AlgebraFn algebra_function(const std::string& name) {
  const std::string prefix = "constant:";
  if (name.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string rest = name.substr(prefix.size());
      const double v = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(rest);
      return presets::constant(v);
    } catch (const std::logic_error&) {
      throw ConfigError("bad constant function '" + name + "'");
    }
  }
  return presets::by_name(name);
}

int levelset(const Common& c, LevelsetArgs a, std::ostream& out) {
  std::string name = c.preset.empty() ? "stefan_psi0" : c.preset;
  if (!c.config.empty()) {
    const json cfg = parse_config(read_file(c.config));
    if (!cfg.is_object()) throw ConfigError("levelset config: expected an object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "function" && value.is_string()) {
        name = value.get<std::string>();
      } else if (key == "alpha_min" && value.is_number()) {
        a.alpha_min = value.get<double>();
      } else if (key == "alpha_max" && value.is_number()) {
        a.alpha_max = value.get<double>();
      } else if (key == "alpha_count" && value.is_number_unsigned()) {
        a.alpha_count = value.get<std::size_t>();
      } else if (key == "schedule" && value.is_array()) {
        a.schedule = value.get<std::vector<double>>();
      } else {
        throw ConfigError("levelset config: unknown key or wrong type for '" + key + "'");
      }
    }
  }
  if (a.alpha_count == 0 || a.alpha_max < a.alpha_min)
    throw ConfigError("levelset: need alpha_count >= 1 and alpha_min <= alpha_max");
  if (a.schedule.empty()) a.schedule = default_delta_schedule();
  for (std::size_t k = 0; k < a.schedule.size(); ++k)
    if (!(a.schedule[k] > 0.0) || (k > 0 && !(a.schedule[k] < a.schedule[k - 1])))
      throw ConfigError("levelset: schedule must be positive and strictly decreasing");

  const AlgebraFn fn = algebra_function(name);
  const json record = {{"function", name},
                       {"alpha_min", a.alpha_min},
                       {"alpha_max", a.alpha_max},
                       {"alpha_count", a.alpha_count},
                       {"schedule", a.schedule},
                       {"tolerances", tolerances(c)}};
  const std::string head = header_comment("levelset", record, c.seed);
  const Output dir(c.out);
  RegularityOptions ro;
  ro.floor = c.tol_regular;
  const MeanOptions mo = mean_options(c);

  std::ostringstream body;
  body << "alpha,delta,estimate,extrapolated,certified\n";
  double worst = 0.0;
  for (double alpha : linspace(a.alpha_min, a.alpha_max, a.alpha_count)) {
    const MeasureEstimate m = level_set_measure(fn, alpha, a.schedule, mo);
    const std::string certified =
        fn.has_gradient() ? (strongly_regular(fn, alpha, ro).certified ? "1" : "0") : "na";
    worst = std::max(worst, m.extrapolated);
    for (std::size_t k = 0; k < m.estimates.size(); ++k)
      body << number(alpha) << ',' << number(m.delta_schedule[k]) << ','
           << number(m.estimates[k]) << ',' << number(m.extrapolated) << ',' << certified
           << '\n';
  }
  dir.write("levelset.csv", head + body.str());
  out << "largest extrapolated level-set measure: " << worst << '\n';
  return kOk;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string header_comment(const std::string& command, const json& record,
                           std::uint64_t seed) {
  std::ostringstream s;
  s << "# homog " << command << " config_hash=" << std::hex << std::setw(16)
    << std::setfill('0') << fnv1a(record.dump()) << std::dec << " seed=" << seed << '\n';
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical homogenization of degenerate parabolic equations", "homog"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  LevelsetArgs ls;
  SolveArgs sv;
  double eps = 0.0;

  CLI::App* hf = app.add_subcommand("homogenize-flux", "tabulate the homogenized flux");
  add_common(hf, common, false, false);
  CLI::App* sw = app.add_subcommand("sweep", "epsilon sweep against the homogenized problem");
  add_common(sw, common, true, true);
  CLI::App* lv = app.add_subcommand("levelset", "level-set measures of an algebra function");
  add_common(lv, common, false, false);
  lv->add_option("--alpha-min", ls.alpha_min)->capture_default_str();
  lv->add_option("--alpha-max", ls.alpha_max)->capture_default_str();
  lv->add_option("--alpha-count", ls.alpha_count)->capture_default_str();
  CLI::App* so = app.add_subcommand("solve", "one oscillating or homogenized solve");
  add_common(so, common, false, false);
  CLI::Option* eps_opt = so->add_option("--eps", eps, "scale (default: the finest)")
                             ->check(CLI::PositiveNumber);
  so->add_flag("--homogenized", sv.homogenized, "solve with the homogenized flux");
  CLI::App* vf = app.add_subcommand("validate-flux", "check the structural hypotheses");
  add_common(vf, common, false, false);

  std::vector<std::string> argv_store = {"homog"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (eps_opt->count() > 0) sv.eps = eps;

  try {
    if (hf->parsed()) return homogenize_flux(common, out);
    if (sw->parsed()) return sweep(common, out);
    if (lv->parsed()) return levelset(common, ls, out);
    if (so->parsed()) return solve_cmd(common, sv, out);
    return validate(common, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: configuration: " << e.what() << '\n';
    return kUsage;
  } catch (const Em0Violation& e) {
    err << "error: " << e.what() << " (alpha " << e.alpha() << ", x " << e.x() << ", v "
        << e.v() << ", mass " << e.mass() << ")\n";
    return kInvalid;
  } catch (const ValidationFailure& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ResolutionTooCoarse& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace homog::cli
