#include "homog/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "homog/errors.hpp"
#include "homog/quadrature.hpp"
#include "homog/solver.hpp"

namespace homog {

std::vector<double> inverse_laplacian(const Grid1D& grid, std::span<const double> h) {
  const std::size_t n = h.size();
  if (n != grid.N) throw std::invalid_argument("inverse_laplacian: size mismatch");
  for (double x : h)
    if (!std::isfinite(x)) throw std::invalid_argument("inverse_laplacian: non-finite data");
  const double inv = 1.0 / (grid.dx() * grid.dx());
  std::vector<double> sub(n, inv), diag(n, -2.0 * inv), super(n, inv);
  diag.front() = diag.back() = -3.0 * inv;
  sub.front() = 0.0;
  super.back() = 0.0;
  return solve_tridiagonal(sub, diag, super, h);
}

DualField inverse_laplacian(const Field& h) {
  DualField out;
  out.U = Field(h.grid, inverse_laplacian(h.grid, h.values), Role::Pressure);
  const std::vector<double> back = laplacian_dirichlet(h.grid, out.U.values);
  for (std::size_t i = 0; i < back.size(); ++i)
    out.defect = std::max(out.defect, std::abs(back[i] - h[i]));
  return out;
}

double dual_residual(const Trajectory& traj, const CellFlux& flux, double t_max) {
  if (traj.levels() < 2) throw std::invalid_argument("dual_residual: need two time levels");
  const Grid1D& grid = traj.grid;
  const double dt = traj.dt;
  for (std::size_t m = 1; m < traj.levels(); ++m)
    if (std::abs(traj.times[m] - traj.times[m - 1] - dt) > 1e-9 * dt)
      throw std::invalid_argument("dual_residual: every time step must be stored");
  std::size_t last = traj.levels() - 1;
  while (last > 0 && traj.times[last] > t_max + 1e-12 * dt) --last;

  const std::vector<double> xi = grid.eigen_weight();
  std::vector<double> prev = inverse_laplacian(grid, traj.u[0]);
  std::vector<double> cur = last >= 1 ? inverse_laplacian(grid, traj.u[1]) : prev;
  std::vector<double> per_level, terms(grid.N);
  for (std::size_t n = 1; n < last; ++n) {
    const std::vector<double> next = inverse_laplacian(grid, traj.u[n + 1]);
    const std::vector<double> w = flux.pressure(traj.u[n], traj.sigma);
    for (std::size_t i = 0; i < grid.N; ++i)
      terms[i] = std::abs((next[i] - prev[i]) / (2.0 * dt) - w[i]) * xi[i];
    per_level.push_back(quad::pairwise_sum(terms) * grid.dx() * dt);
    prev = std::move(cur);
    cur = next;
  }
  return quad::pairwise_sum(per_level);
}

double dual_sup_distance(const Grid1D& grid, const std::vector<std::vector<double>>& u1,
                         const std::vector<std::vector<double>>& u2, double interior) {
  if (u1.size() != u2.size()) throw std::invalid_argument("dual_sup_distance: level mismatch");
  const double margin = 0.5 * (1.0 - interior) * (grid.b - grid.a);
  double worst = 0.0;
  for (std::size_t m = 0; m < u1.size(); ++m) {
    const std::vector<double> a = inverse_laplacian(grid, u1[m]);
    const std::vector<double> b = inverse_laplacian(grid, u2[m]);
    for (std::size_t i = 0; i < grid.N; ++i) {
      const double x = grid.x(i);
      if (x < grid.a + margin || x > grid.b - margin) continue;
      worst = std::max(worst, std::abs(a[i] - b[i]));
    }
  }
  return worst;
}

}  // namespace homog
