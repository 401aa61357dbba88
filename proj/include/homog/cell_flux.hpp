#pragma once

// Constitutive law of each grid cell: the pressure v_i = f_i(u_i) seen by
// the finite-volume scheme, its right derivative and its inverse.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "homog/flux.hpp"
#include "homog/grid.hpp"
#include "homog/homogenized.hpp"

namespace homog {

struct CellLaw {
  std::function<double(double)> f;
  std::function<double(double)> df;  // right derivative
  std::function<double(double)> g;   // inverse, right-continuous at jumps
};

enum class Sampling {
  /// Coefficients evaluated at the cell centre x_i / eps.
  Pointwise,
  /// The density of a cell is the mean over the cell of g(x_i, y, v), so a
  /// cell holding a full period reproduces the homogenized law exactly.
  CellAverage,
};

struct CellAverageOptions {
  TableOptions table{.u_lo = -6.0,
                     .u_hi = 6.0,
                     .base_points = 65,
                     .linearity_tol = 1e-9,
                     .min_width = 1e-9,
                     .flat_fraction = 0.0,
                     .flat_min_width = 1e-6,
                     .max_knots = 8000};
  quad::Options quadrature{.abs_tol = 1e-12, .switch_samples = 32};
};

class CellFlux {
 public:
  /// f(x, x / eps, u) on the grid. eps <= 0 means "no fast variable" and is
  /// only accepted for non-oscillating fluxes.
  static CellFlux oscillating(const Flux& flux, const Grid1D& grid, double eps,
                              Sampling sampling = Sampling::Pointwise,
                              const CellAverageOptions& opts = {});
  static CellFlux homogenized(std::shared_ptr<const HomogenizedFlux> fbar,
                              const Grid1D& grid);

  const Grid1D& grid() const { return grid_; }
  const std::string& id() const { return id_; }
  /// 2 for an oscillating type-2 flux (sigma-continuation required).
  int type() const { return type_; }
  double eps() const { return eps_; }
  Sampling sampling() const { return sampling_; }

  double f(std::size_t i, double u) const { return laws_[i]->f(u); }
  double df(std::size_t i, double u) const { return laws_[i]->df(u); }
  double g(std::size_t i, double v) const { return laws_[i]->g(v); }
  /// Number of distinct tabulated laws (CellAverage); 0 otherwise.
  std::size_t tables() const { return tables_; }

  /// Rest density g_i(0).
  double rest(std::size_t i) const { return rest_[i]; }
  /// Regularized pressure f_i(u) + sigma (u - g_i(0)); the rest state keeps
  /// zero pressure for every sigma.
  double w(std::size_t i, double u, double sigma) const {
    return f(i, u) + sigma * (u - rest_[i]);
  }
  std::vector<double> pressure(const std::vector<double>& u, double sigma = 0.0) const;

 private:
  Grid1D grid_;
  std::string id_;
  int type_ = 1;
  double eps_ = 0.0;
  Sampling sampling_ = Sampling::Pointwise;
  std::size_t tables_ = 0;
  std::vector<std::shared_ptr<const CellLaw>> laws_;
  std::vector<double> rest_;

  void fill_rest();
};

}  // namespace homog
