#pragma once

// Backward-Euler finite volumes for u_t = (f(x, u))_xx on an interval with
// zero pressure at both ends, plus discrete stability diagnostics.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "homog/cell_flux.hpp"
#include "homog/grid.hpp"

namespace homog {

/// (v_{i-1} - 2 v_i + v_{i+1}) / dx^2 with ghosts v_{-1} = -v_0, v_N = -v_{N-1}.
Field laplacian_dirichlet(const Field& v);
std::vector<double> laplacian_dirichlet(const Grid1D& grid, std::span<const double> v);

/// Solves a tridiagonal system (sub, diag, super) by elimination without
/// pivoting. Throws SingularSystem on a vanishing pivot.
std::vector<double> solve_tridiagonal(std::span<const double> sub,
                                      std::span<const double> diag,
                                      std::span<const double> super,
                                      std::span<const double> rhs);

struct StepOptions {
  double tol = 1e-10;          // infinity norm of the nonlinear residual
  int max_iterations = 200;    // Newton iterations, all rounds together
  int sweeps_per_fallback = 20;
};

struct StepStats {
  int newton_iterations = 0;
  int sweeps = 0;
  double residual = 0.0;
  std::vector<double> history;
};

/// u_{n+1} = u_n + dt L(w(u_{n+1}, sigma)) with w from CellFlux::w. Throws
/// NonlinearSolveFailure or NeedsRegularization.
std::vector<double> step_implicit(const CellFlux& flux, std::span<const double> un,
                                  double dt, double sigma, const StepOptions& opts = {},
                                  StepStats* stats = nullptr);
Field step_implicit(const CellFlux& flux, const Field& un, double dt, double sigma,
                    const StepOptions& opts = {}, StepStats* stats = nullptr);

struct SolveOptions {
  double T = 1.0;
  double dt = 1e-3;
  /// Strictly decreasing, at least three levels; used for type-2 fluxes only.
  std::vector<double> sigma_schedule = {1e-2, 5e-3, 2.5e-3};
  /// Required contraction of consecutive distances when sigma halves.
  double cauchy_factor = 1.8;
  /// Every stored level is kept when empty; otherwise only these times
  /// (rounded to the nearest step) plus t = 0 and t = T.
  std::vector<double> store_times;
  StepOptions step{};
};

/// Runs a single sigma level.
Trajectory evolve(const CellFlux& flux, std::span<const double> u0, double sigma,
                  const SolveOptions& opts);

/// Type 1: one run at sigma = 0. Type 2: one run per sigma level and a
/// Cauchy check on the final states; returns the finest level. Throws
/// SigmaCauchyFailure.
Trajectory solve(const CellFlux& flux, std::span<const double> u0,
                 const SolveOptions& opts);

/// u_i = g_i(alpha): the profile with constant pressure alpha.
Field stationary_profile(const CellFlux& flux, double alpha);

/// Sum |u1 - u2| xi dx with the first Dirichlet eigenfunction xi.
double weighted_l1_distance(const Grid1D& grid, std::span<const double> u1,
                            std::span<const double> u2);
double weighted_l1_distance(const Field& u1, const Field& u2);
/// Sum |u1 - u2| dx.
double l1_distance(const Grid1D& grid, std::span<const double> u1,
                   std::span<const double> u2);

/// Net outflow -2 (w_0 + w_{N-1}) / dx of the pressure w through the two
/// boundary faces; equals d/dt of the total mass under the scheme.
double boundary_flux(const Grid1D& grid, std::span<const double> w);

/// Evolves both data for T and counts (cell, step) pairs with
/// u1 > u2 + 1e-10.
std::size_t comparison_check(const CellFlux& flux, std::span<const double> u01,
                             std::span<const double> u02, double T, double dt,
                             double sigma, const StepOptions& opts = {});

using SpaceTimeFn = std::function<double(double x, double t)>;

struct EntropyResidual {
  double value = 0.0;
  double tolerance = 0.0;  // C (dx + dt)
  bool satisfied() const { return value >= -tolerance; }
};

/// Discrete entropy inequality for the constant k tested against phi >= 0,
/// which must vanish at the first and last stored times. The trajectory
/// must hold every time step.
EntropyResidual kruzhkov_residual(const Trajectory& traj, const CellFlux& flux, double k,
                                  const SpaceTimeFn& phi, double C = 1.0);

/// Weighted L1 norm of u(. + m dx) - u over the cells where both exist.
double translation_modulus(const Field& u, std::size_t m);
/// Largest weighted L1 distance between stored levels `lag` apart.
double time_modulus(const Trajectory& traj, std::size_t lag);

/// CSV rows (t, x, u, v) for the stored levels.
std::string trajectory_csv(const Trajectory& traj, const CellFlux& flux);

}  // namespace homog
