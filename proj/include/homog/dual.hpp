#pragma once

// Potential U = inverse Dirichlet Laplacian of a density, and the residual of
// the fully nonlinear equation U_t = f(x, x/eps, Lap U) along primal
// trajectories.

#include <cmath>
#include <span>
#include <vector>

#include "homog/cell_flux.hpp"
#include "homog/grid.hpp"

namespace homog {

struct DualField {
  Field U;             // Role::Pressure
  double defect = 0.0;  // max |laplacian_dirichlet(U) - h|
};

/// Direct tridiagonal solve of laplacian_dirichlet(U) = h.
DualField inverse_laplacian(const Field& h);
std::vector<double> inverse_laplacian(const Grid1D& grid, std::span<const double> h);

/// Sum over interior time levels n of dt * sum_i |(U^{n+1} - U^{n-1}) / (2 dt)
/// - w_i(u^n_i, sigma)| xi_i dx, using the trajectory's sigma. Levels
/// after `t_max` are ignored. The trajectory must hold every step.
double dual_residual(const Trajectory& traj, const CellFlux& flux,
                     double t_max = INFINITY);

/// max over stored levels and the cells of the centred `interior` fraction of
/// the grid of |inverse_laplacian(u1) - inverse_laplacian(u2)|.
double dual_sup_distance(const Grid1D& grid, const std::vector<std::vector<double>>& u1,
                         const std::vector<std::vector<double>>& u2,
                         double interior = 0.8);

}  // namespace homog
