#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "homog/flux.hpp"
#include "homog/profile.hpp"
#include "json.hpp"

namespace homog {

struct TableOptions {
  double u_lo = -4.0;  // range of the tabulated mean that must be covered
  double u_hi = 4.0;
  std::size_t base_points = 129;
  /// Bisect while the midpoint deviates from the chord by more than this.
  double linearity_tol = 1e-10;
  double min_width = 1e-9;
  /// Bisect where the chord slope is below flat_fraction * median slope.
  double flat_fraction = 0.05;
  double flat_min_width = 1e-6;
  std::size_t max_knots = 20000;
};

/// Samples of a monotone mean v -> gbar(v).
struct GbarSampling {
  std::vector<double> v;
  std::vector<double> gbar;
};

/// Samples an increasing function on an adaptive grid whose values cover
/// [opts.u_lo, opts.u_hi].
GbarSampling sample_monotone(const std::function<double(double)>& gbar,
                             const TableOptions& opts);

/// Profile through the samples and its inverse. Throws Em0Violation when the
/// samples are not strictly increasing.
MonotoneProfile forward_profile(const GbarSampling& s);
MonotoneProfile inverse_profile(const GbarSampling& s);

struct Em0Entry {
  double alpha = 0.0;
  double x = 0.0;
  double v = 0.0;
  double mass = 0.0;
  bool converged = true;
};

struct HomogenizedFluxOptions {
  TableOptions table{};
  MeanOptions mean{};
  double em0_tol = 1e-3;
  std::size_t em0_probes = 41;
  std::size_t em0_max_x = 17;
  std::vector<double> em0_schedule = default_delta_schedule();
};

/// Per-x tables of fbar(x, .) = inverse of gbar(x, .), piecewise linear in x.
class HomogenizedFlux {
 public:
  HomogenizedFlux(std::vector<double> x_grid,
                  std::vector<std::shared_ptr<const MonotoneProfile>> fbar,
                  std::vector<std::shared_ptr<const MonotoneProfile>> gbar,
                  std::vector<GbarSampling> samples,
                  std::vector<Em0Entry> em0_report, std::string flux_id);

  double operator()(double x, double u) const;
  double gbar(double x, double v) const;
  /// Right derivative of fbar(x, .) at u.
  double slope(double x, double u) const;

  const std::vector<double>& x_grid() const { return x_grid_; }
  const MonotoneProfile& fbar_at(std::size_t i) const { return *fbar_[i]; }
  const MonotoneProfile& gbar_at(std::size_t i) const { return *gbar_[i]; }
  std::shared_ptr<const MonotoneProfile> fbar_ptr(std::size_t i) const { return fbar_[i]; }
  std::shared_ptr<const MonotoneProfile> gbar_ptr(std::size_t i) const { return gbar_[i]; }
  const GbarSampling& samples_at(std::size_t i) const { return samples_[i]; }
  const std::vector<Em0Entry>& em0_report() const { return em0_report_; }
  const std::string& flux_id() const { return flux_id_; }
  double min_slope() const;  // modulus of strict monotonicity of fbar
  double max_slope() const;  // Lipschitz constant of fbar

  nlohmann::json header() const;
  /// CSV rows (x, u, fbar) over the x-grid and the given u-grid.
  std::string to_csv(std::span<const double> u_grid) const;

 private:
  std::vector<double> x_grid_;
  std::vector<std::shared_ptr<const MonotoneProfile>> fbar_, gbar_;
  std::vector<GbarSampling> samples_;
  std::vector<Em0Entry> em0_report_;
  std::string flux_id_;
};

/// Checks the zero-measure condition on the level sets {alpha h + S = v}
/// for every jump alpha of G. Returns the probed entries; throws
/// Em0Violation at the first failing probe.
std::vector<Em0Entry> check_em0(const Flux& flux, std::span<const double> x_grid,
                                const HomogenizedFluxOptions& opts = {});

HomogenizedFlux homogenized_f(const Flux& flux, std::span<const double> x_grid,
                              const HomogenizedFluxOptions& opts = {});

}  // namespace homog
