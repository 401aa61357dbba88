#include "homog/cell_flux.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace homog {
namespace {

std::shared_ptr<const CellLaw> pointwise_law(std::shared_ptr<const Flux> flux, double x,
                                             std::vector<double> c) {
  auto law = std::make_shared<CellLaw>();
  law->f = [flux, x, c](double u) { return flux->f(x, c, u); };
  law->df = [flux, x, c](double u) { return flux->df(x, c, u); };
  law->g = [flux, x, c](double v) { return flux->g(x, c, v); };
  return law;
}

std::shared_ptr<const CellLaw> table_law(const GbarSampling& s) {
  auto forward = std::make_shared<const MonotoneProfile>(forward_profile(s));
  auto inverse = std::make_shared<const MonotoneProfile>(inverse_profile(s));
  auto law = std::make_shared<CellLaw>();
  law->f = [inverse](double u) { return (*inverse)(u); };
  law->df = [inverse](double u) { return inverse->right_slope(u); };
  law->g = [forward](double v) { return (*forward)(v); };
  return law;
}

// Period of the first coefficient when every coefficient is periodic.
double common_period(const Flux& flux) {
  double period = 0.0;
  for (const AlgebraFn& c : flux.coefficients()) {
    const auto* p = std::get_if<Periodic>(&c.kind());
    if (p == nullptr) return 0.0;
    if (period == 0.0) period = p->period[0];
    if (std::abs(p->period[0] - period) > 1e-14) return 0.0;
  }
  return period;
}

}  // namespace

CellFlux CellFlux::oscillating(const Flux& flux, const Grid1D& grid, double eps,
                               Sampling sampling, const CellAverageOptions& opts) {
  if (flux.oscillates() && !(eps > 0.0))
    throw std::invalid_argument("CellFlux: an oscillating flux needs eps > 0");
  CellFlux out;
  out.grid_ = grid;
  out.id_ = flux.id();
  out.type_ = flux.type();
  out.eps_ = eps;
  out.sampling_ = flux.oscillates() ? sampling : Sampling::Pointwise;
  auto shared = std::make_shared<const Flux>(flux);
  const double dx = grid.dx();
  out.laws_.reserve(grid.N);

  if (out.sampling_ == Sampling::Pointwise) {
    for (std::size_t i = 0; i < grid.N; ++i) {
      const double x = grid.x(i);
      const double y = flux.oscillates() ? x / eps : 0.0;
      out.laws_.push_back(pointwise_law(shared, x, flux.coefficient_values({y, 0.0})));
    }
    out.fill_rest();
    return out;
  }

  const double period = flux.x_dependent() ? 0.0 : common_period(flux);
  std::map<long long, std::shared_ptr<const CellLaw>> cache;
  for (std::size_t i = 0; i < grid.N; ++i) {
    const double x = grid.x(i);
    const double lo = (x - 0.5 * dx) / eps;
    const double hi = (x + 0.5 * dx) / eps;
    long long key = -1 - static_cast<long long>(i);
    double shift = 0.0;
    if (period > 0.0) {
      shift = period * std::floor(lo / period);
      key = std::llround((lo - shift) * 1e9);
    }
    auto it = cache.find(key);
    if (it == cache.end()) {
      const double wlo = lo - shift, whi = hi - shift;
      const GbarSampling s = sample_monotone(
          [&](double v) {
            const std::vector<CoefficientSwitch> sw = jump_switches(flux, x, v);
            return window_mean(
                flux.coefficients(),
                [&](std::span<const double> c) { return flux.g(x, c, v); }, wlo, whi,
                opts.quadrature, sw);
          },
          opts.table);
      it = cache.emplace(key, table_law(s)).first;
    }
    out.laws_.push_back(it->second);
  }
  out.tables_ = cache.size();
  out.fill_rest();
  return out;
}

CellFlux CellFlux::homogenized(std::shared_ptr<const HomogenizedFlux> fbar,
                               const Grid1D& grid) {
  CellFlux out;
  out.grid_ = grid;
  out.id_ = fbar->flux_id() + "/homogenized";
  out.type_ = 1;
  for (std::size_t i = 0; i < grid.N; ++i) {
    const double x = grid.x(i);
    auto law = std::make_shared<CellLaw>();
    law->f = [fbar, x](double u) { return (*fbar)(x, u); };
    law->df = [fbar, x](double u) { return fbar->slope(x, u); };
    law->g = [fbar, x](double v) { return fbar->gbar(x, v); };
    out.laws_.push_back(std::move(law));
  }
  out.fill_rest();
  return out;
}

void CellFlux::fill_rest() {
  rest_.resize(laws_.size());
  for (std::size_t i = 0; i < laws_.size(); ++i) rest_[i] = laws_[i]->g(0.0);
}

std::vector<double> CellFlux::pressure(const std::vector<double>& u, double sigma) const {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = w(i, u[i], sigma);
  return v;
}

}  // namespace homog
