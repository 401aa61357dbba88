#include "homog/flux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "homog/errors.hpp"
#include "homog/quadrature.hpp"

namespace homog {

Flux::Flux(std::string id, Interval domain, std::vector<AlgebraFn> coefficients,
           std::variant<Type1Law, Type2Law> law, bool x_dependent)
    : id_(std::move(id)),
      domain_(domain),
      coefficients_(std::move(coefficients)),
      law_(std::move(law)),
      x_dependent_(x_dependent) {
  if (!(domain_.b > domain_.a))
    throw std::invalid_argument("Flux: empty domain");
  for (const AlgebraFn& c : coefficients_)
    if (c.dim() != 1)
      throw std::invalid_argument("Flux: the solver is one-dimensional");
}

Flux Flux::type1(std::string id, Interval domain,
                 std::vector<AlgebraFn> coefficients, PressureRule f,
                 PressureRule g, std::optional<PressureRule> df,
                 bool x_dependent) {
  return Flux(std::move(id), domain, std::move(coefficients),
              Type1Law{std::move(f), std::move(g), std::move(df)}, x_dependent);
}

Flux Flux::type2(std::string id, Interval domain,
                 std::vector<AlgebraFn> coefficients, CoefficientRule h,
                 CoefficientRule S, MonotoneProfile F, bool x_dependent) {
  GeneralizedInverse inv = generalized_inverse(F);
  return Flux(std::move(id), domain, std::move(coefficients),
              Type2Law{std::move(h), std::move(S), std::move(F),
                       std::move(inv.inverse), std::move(inv.jumps)},
              x_dependent);
}

Flux Flux::with_domain(Interval domain) const {
  Flux copy = *this;
  copy.domain_ = domain;
  return copy;
}

nlohmann::json Flux::describe() const {
  nlohmann::json j;
  j["id"] = id_;
  j["type"] = type();
  j["domain"] = {domain_.a, domain_.b};
  j["x_dependent"] = x_dependent_;
  auto& cs = j["coefficients"] = nlohmann::json::array();
  for (const AlgebraFn& c : coefficients_) cs.push_back(c.describe());
  if (const Type2Law* law = type2_law()) {
    j["F"] = law->F.to_json();
    j["jumps"] = law->jumps;
  }
  return j;
}

std::vector<double> Flux::coefficient_values(const Point& y) const {
  std::vector<double> c(coefficients_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = coefficients_[k](y);
  return c;
}

double Flux::f(double x, std::span<const double> c, double u) const {
  if (const Type1Law* law = type1_law()) return law->f(x, c, u);
  const Type2Law& law = *type2_law();
  return law.h(x, c) * law.F(u) + law.S(x, c);
}

double Flux::g(double x, std::span<const double> c, double v) const {
  if (const Type1Law* law = type1_law()) return law->g(x, c, v);
  const Type2Law& law = *type2_law();
  return law.G.right_limit((v - law.S(x, c)) / law.h(x, c));
}

double Flux::df(double x, std::span<const double> c, double u) const {
  if (const Type1Law* law = type1_law()) {
    if (law->df) return (*law->df)(x, c, u);
    const double h = 1e-6 * std::max(1.0, std::abs(u));
    return (law->f(x, c, u + h) - law->f(x, c, u - h)) / (2.0 * h);
  }
  const Type2Law& law = *type2_law();
  return law.h(x, c) * law.F.right_slope(u);
}

double flux_eval(const Flux& flux, double x, const Point& y, double u) {
  return flux.f(x, flux.coefficient_values(y), u);
}

double pressure_inverse_eval(const Flux& flux, double x, const Point& y,
                             double v) {
  return flux.g(x, flux.coefficient_values(y), v);
}

std::vector<CoefficientSwitch> jump_switches(const Flux& flux, double x, double v) {
  std::vector<CoefficientSwitch> out;
  if (const Type2Law* law = flux.type2_law())
    for (double alpha : law->jumps)
      out.push_back([law, x, v, alpha](std::span<const double> c) {
        return alpha * law->h(x, c) + law->S(x, c) - v;
      });
  return out;
}

double homogenized_g(const Flux& flux, double x, double v,
                     const MeanOptions& opts) {
  return compose_mean(
      flux.coefficients(),
      [&](std::span<const double> c) { return flux.g(x, c, v); },
      jump_switches(flux, x, v), opts);
}

namespace {

double g_star_coeff(const Flux& flux, double x, std::span<const double> c,
                    double v) {
  if (const Type2Law* law = flux.type2_law()) {
    // s = S + h r turns the integral of G((s - S) / h) into h times an
    // exact integral of the piecewise-linear inverse.
    const double h = law->h(x, c);
    const double S = law->S(x, c);
    return h * law->G.integral(-S / h, (v - S) / h);
  }
  quad::Options q;
  q.abs_tol = 1e-12 * std::max(1.0, std::abs(v));
  return quad::integrate([&](double s) { return flux.g(x, c, s); }, 0.0, v, q)
      .value;
}

}  // namespace

double g_star(const Flux& flux, double x, const Point& y, double v) {
  return g_star_coeff(flux, x, flux.coefficient_values(y), v);
}

double gbar_star(const Flux& flux, double x, double v, const MeanOptions& opts) {
  return compose_mean(
      flux.coefficients(),
      [&](std::span<const double> c) { return g_star_coeff(flux, x, c, v); },
      opts);
}

double convexity_gap(const Flux& flux, double x, double v1, double v2,
                     double theta, const MeanOptions& opts) {
  const double vm = (1.0 - theta) * v1 + theta * v2;
  return (1.0 - theta) * gbar_star(flux, x, v1, opts) +
         theta * gbar_star(flux, x, v2, opts) - gbar_star(flux, x, vm, opts);
}

double convexity_bound(double min_slope, double v1, double v2, double theta) {
  return 0.5 * min_slope * theta * (1.0 - theta) * (v2 - v1) * (v2 - v1);
}

nlohmann::json FluxReport::to_json() const {
  return {{"monotonicity_violations", monotonicity_violations},
          {"lipschitz", lipschitz},
          {"min_h", min_h},
          {"max_boundary_pressure", max_boundary_pressure},
          {"witness_hi", witness_hi},
          {"witness_lo", witness_lo},
          {"coercive", coercive},
          {"fbar_lipschitz_bound", fbar_lipschitz_bound},
          {"failures", failures}};
}

namespace {

// Sample points of the fast variable covering the coefficient cell.
std::vector<Point> fast_samples(const Flux& flux, std::size_t n) {
  if (!flux.oscillates()) return {Point{0.0, 0.0}};
  double extent = 64.0;
  if (const auto* p = std::get_if<Periodic>(&flux.coefficients()[0].kind()))
    extent = p->period[0];
  std::vector<Point> ys(n);
  for (std::size_t j = 0; j < n; ++j)
    ys[j] = {extent * (static_cast<double>(j) + 0.5) / static_cast<double>(n), 0.0};
  return ys;
}

}  // namespace

FluxReport inspect_flux(const Flux& flux, const ValidationOptions& opts) {
  FluxReport rep;
  const std::size_t n = std::max<std::size_t>(opts.resolution, 4);
  const Interval dom = flux.domain();
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = dom.a + dom.length() * static_cast<double>(i) / static_cast<double>(n - 1);
  if (!flux.x_dependent()) xs = {dom.a};
  const std::vector<Point> ys = fast_samples(flux, n);
  const std::size_t nu = 4 * n;
  const double du = (opts.u_hi - opts.u_lo) / static_cast<double>(nu);
  rep.min_h = std::numeric_limits<double>::infinity();
  rep.witness_hi = std::numeric_limits<double>::infinity();
  rep.witness_lo = -std::numeric_limits<double>::infinity();
  const bool strict = flux.type() == 1;
  for (double x : xs) {
    for (const Point& y : ys) {
      const std::vector<double> c = flux.coefficient_values(y);
      if (const Type2Law* law = flux.type2_law())
        rep.min_h = std::min(rep.min_h, law->h(x, c));
      double prev = flux.f(x, c, opts.u_lo);
      for (std::size_t j = 1; j <= nu; ++j) {
        const double cur = flux.f(x, c, opts.u_lo + du * static_cast<double>(j));
        if (strict ? !(cur > prev) : cur < prev) ++rep.monotonicity_violations;
        rep.lipschitz = std::max(rep.lipschitz, (cur - prev) / du);
        prev = cur;
      }
      const double f0 = flux.f(x, c, 0.0);
      rep.witness_hi = std::min(rep.witness_hi, flux.f(x, c, opts.u_hi) - f0);
      rep.witness_lo = std::max(rep.witness_lo, flux.f(x, c, opts.u_lo) - f0);
    }
  }
  // Boundary: zero pressure at u = 0 (type 1) or S = 0 (type 2) at the
  // fast positions x / eps actually seen by the eps-problems.
  for (double x : {dom.a, dom.b}) {
    std::vector<Point> probes;
    if (flux.oscillates())
      for (double eps : opts.boundary_epsilons) probes.push_back({x / eps, 0.0});
    else
      probes.push_back({0.0, 0.0});
    for (const Point& y : probes) {
      const std::vector<double> c = flux.coefficient_values(y);
      const double p = flux.type2_law() ? flux.type2_law()->S(x, c) : flux.f(x, c, 0.0);
      rep.max_boundary_pressure = std::max(rep.max_boundary_pressure, std::abs(p));
    }
  }
  rep.coercive = rep.witness_hi > 0.0 && rep.witness_lo < 0.0;
  if (const Type2Law* law = flux.type2_law())
    rep.coercive = rep.coercive && law->F.slope_below() > 0.0 &&
                   law->F.slope_above() > 0.0;
  // gbar has slope >= 1 / Lip, hence fbar is Lipschitz with the same bound.
  rep.fbar_lipschitz_bound = rep.lipschitz;
  if (flux.type() == 1) rep.min_h = 0.0;

  if (rep.monotonicity_violations > 0) rep.failures.push_back("monotonicity");
  if (flux.type() == 2 && !(rep.min_h > opts.h_floor)) rep.failures.push_back("h-floor");
  if (!(rep.max_boundary_pressure < opts.boundary_tol))
    rep.failures.push_back("boundary-pressure");
  if (!rep.coercive) rep.failures.push_back("coercivity");
  if (!std::isfinite(rep.lipschitz)) rep.failures.push_back("lipschitz");
  return rep;
}

FluxReport validate_flux(const Flux& flux, const ValidationOptions& opts) {
  FluxReport rep = inspect_flux(flux, opts);
  if (!rep.passed()) {
    std::ostringstream msg;
    msg << "flux '" << flux.id() << "' failed validation:";
    for (const std::string& f : rep.failures) msg << ' ' << f;
    throw ValidationFailure(msg.str(), rep.failures);
  }
  return rep;
}

}  // namespace homog
