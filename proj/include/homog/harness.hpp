#pragma once

// Epsilon sweeps: solve the oscillating problem for a list of scales and the
// homogenized problem once, then compare them.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "homog/algebra.hpp"
#include "homog/cell_flux.hpp"
#include "homog/flux.hpp"
#include "homog/grid.hpp"
#include "homog/homogenized.hpp"
#include "homog/solver.hpp"
#include "json.hpp"

namespace homog {

/// Initial pressure phi0(x); the density is g(x, y, phi0(x)).
struct WellPrepared {
  std::function<double(double)> phi0;
};

/// u0(x, y) = rule(x, c(y)) for the coefficient values c(y).
struct General {
  std::vector<AlgebraFn> coefficients;
  std::function<double(double x, std::span<const double> c)> rule;
  /// Switches whose sign changes mark jumps of rule(x, .).
  std::function<std::vector<CoefficientSwitch>(double x)> switches;
};

using InitialData = std::variant<WellPrepared, General>;

General well_prepared_initial(const Flux& flux, std::function<double(double)> phi0);

/// Mean over y of u0(x_i, y) on every cell of the grid.
Field initial_mean(const General& u0, const Grid1D& grid, const MeanOptions& opts = {});

/// Cell averages of x -> u0(x, x / eps).
std::vector<double> initial_cell_average(const General& u0, const Grid1D& grid, double eps);

struct Scenario {
  Flux flux = flux_presets::heat();
  Interval omega{-2.0, 2.0};
  double T = 0.5;
  InitialData initial = WellPrepared{[](double) { return 0.0; }};
  std::vector<double> epsilons = {0.25, 0.125, 0.0625, 0.03125};
  std::size_t cells_per_period = 16;
  double dt_factor = 0.5;  // dt = dt_factor * (finest dx)
  std::size_t test_count = 5;
  double test_width = 0.5;
  std::vector<double> sigmas = {4e-4, 2e-4, 1e-4};
  /// Canonical config record; hashed into every output header.
  nlohmann::json record = nlohmann::json::object();
};

/// JSON text with syntax errors reported as "line N: ..." ConfigErrors.
nlohmann::json parse_config(const std::string& text);

/// Strict loader: unknown keys, wrong types and bad values throw ConfigError.
Scenario scenario_from_json(const nlohmann::json& config);
/// Parses text and reports syntax errors with their line number.
Scenario scenario_from_text(const std::string& text);
/// "stefan-wellprepared" or "stefan-general".
nlohmann::json preset_config(const std::string& name);
std::vector<std::string> scenario_presets();

/// The scenario's data as a function of (x, y).
General general_initial(const Scenario& s);

/// Default test set: `count` products b((x - c_k) / width) * bump(t; T/2, T/2)
/// with centres c_k evenly spaced inside the domain. b is a Gaussian of
/// standard deviation 1/6 cut off smoothly between 5/6 and 1.
std::vector<SpaceTimeFn> default_test_functions(const Interval& omega, double T,
                                                std::size_t count, double width);

/// Grid of the scale eps: cells_per_period cells per period of x -> x / eps.
Grid1D grid_for(const Scenario& s, double eps);

/// Block average of a fine-grid vector onto a grid that divides it.
std::vector<double> restrict_to(const Grid1D& fine, std::span<const double> u,
                                const Grid1D& coarse);

/// max over phi of |sum_n dt sum_i (u - ubar) phi(x_i, t_n) dx| over the
/// stored levels 1..last with t_n <= t_max. Both trajectories share the grid
/// and the time levels.
double weak_star_error(const Trajectory& u, const std::vector<std::vector<double>>& ubar,
                       std::span<const SpaceTimeFn> tests, double t_max = INFINITY);

/// L1 distance over the centred `interior` fraction of the domain and the
/// levels with t in [t_min, t_max] between u and the cell profiles
/// g_i(fbar(x_i, ubar_i)).
double corrector_error(const Trajectory& u, const std::vector<std::vector<double>>& ubar,
                       const CellFlux& cells, const HomogenizedFlux& fbar, double t_min,
                       double t_max, double interior = 0.8);

struct OrderFit {
  double slope = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(error) against log(eps). Needs three points
/// and positive errors.
OrderFit estimate_order(std::span<const double> eps, std::span<const double> errors);

struct EpsRecord {
  double eps = 0.0;
  std::size_t cells = 0;
  double dx = 0.0;
  std::vector<double> times;  // T/4, T/2, T
  std::vector<double> weak_star;
  std::vector<double> corrector;
  std::vector<double> dual_residual;
  double uniform_dual = 0.0;
  double runtime_s = 0.0;
  double sigma = 0.0;
  std::vector<double> cauchy_distances;
};

struct EpsSweepReport {
  std::vector<EpsRecord> records;
  Trajectory homogenized;  // on the finest grid
  std::shared_ptr<const HomogenizedFlux> fbar;
  double dt = 0.0;
  std::vector<std::pair<std::string, OrderFit>> orders;
};

struct SweepOptions {
  std::size_t max_threads = 0;  // 0: one per scale
  HomogenizedFluxOptions homogenization{};
  CellAverageOptions cells{};
  StepOptions step{};
};

/// Solves the homogenized problem on the finest grid and every scale; the
/// scales run concurrently.
EpsSweepReport run_sweep(const Scenario& s, const SweepOptions& opts = {});

/// uniform_dual of each record, in scale order.
std::vector<double> uniform_dual_convergence(const EpsSweepReport& report);

/// Rows eps,t,weak_star,corrector_l1,dual_residual,runtime_s. Runtimes are
/// written as 0 unless `timing` is set.
std::string sweep_csv(const EpsSweepReport& report, bool timing);
/// Rows metric,slope,stderr,points.
std::string orders_csv(const EpsSweepReport& report);

}  // namespace homog
