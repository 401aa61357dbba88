#include "homog/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {
namespace {

double frac(double t) { return t - std::floor(t); }

std::vector<double> torus_angles(const TorusLift& lift, int dim,
                                 const Point& y) {
  std::vector<double> theta(lift.frequencies);
  for (std::size_t k = 0; k < lift.frequencies; ++k) {
    double s = 0.0;
    for (int j = 0; j < dim; ++j)
      s += lift.winding[k * static_cast<std::size_t>(dim) + j] * y[j];
    theta[k] = frac(s);
  }
  return theta;
}

const TorusLift* lift_of(const AlgebraFn& fn) {
  if (const auto* t = std::get_if<TorusLift>(&fn.kind())) return t;
  if (const auto* p = std::get_if<Perturbed>(&fn.kind())) return &p->base;
  return nullptr;
}

bool same_winding(const TorusLift& a, const TorusLift& b) {
  if (a.frequencies != b.frequencies || a.winding.size() != b.winding.size())
    return false;
  for (std::size_t i = 0; i < a.winding.size(); ++i)
    if (std::abs(a.winding[i] - b.winding[i]) > 1e-14) return false;
  return true;
}

// Shared representation of a list of functions: either a period cell in
// y-space or a torus [0,1)^m.
struct Representation {
  bool torus = false;
  int dim = 1;
  std::vector<double> lo, hi;  // integration box
};

Representation common_representation(std::span<const AlgebraFn> fns) {
  Representation rep;
  const AlgebraFn& head = fns.front();
  rep.dim = head.dim();
  if (const auto* p = std::get_if<Periodic>(&head.kind())) {
    for (const AlgebraFn& fn : fns) {
      const auto* q = std::get_if<Periodic>(&fn.kind());
      if (q == nullptr || fn.dim() != head.dim())
        throw IncompatibleRepresentations(
            "cannot mix periodic and torus-lift representations");
      for (int j = 0; j < rep.dim; ++j)
        if (std::abs(q->period[j] - p->period[j]) > 1e-14)
          throw IncompatibleRepresentations(
              "periodic functions have different period cells");
    }
    for (int j = 0; j < rep.dim; ++j) {
      rep.lo.push_back(0.0);
      rep.hi.push_back(p->period[j]);
    }
    return rep;
  }
  const TorusLift* base = lift_of(head);
  for (const AlgebraFn& fn : fns) {
    const TorusLift* other = lift_of(fn);
    if (other == nullptr || fn.dim() != head.dim())
      throw IncompatibleRepresentations(
          "cannot mix periodic and torus-lift representations");
    if (!same_winding(*base, *other))
      throw IncompatibleRepresentations("winding matrices differ");
  }
  rep.torus = true;
  rep.lo.assign(base->frequencies, 0.0);
  rep.hi.assign(base->frequencies, 1.0);
  return rep;
}

// Value of fn on the shared integration domain: y for periodic cells, theta
// for torus lifts (Perturbed tails vanish at infinity and drop out).
double native_eval(const AlgebraFn& fn, std::span<const double> coord,
                   bool torus) {
  if (torus) return lift_of(fn)->rule(coord);
  Point y{coord[0], coord.size() > 1 ? coord[1] : 0.0};
  return fn(y);
}

double box_volume(const Representation& rep) {
  double v = 1.0;
  for (std::size_t j = 0; j < rep.lo.size(); ++j) v *= rep.hi[j] - rep.lo[j];
  return v;
}

}  // namespace

AlgebraFn::AlgebraFn(int dim, Kind kind, std::string name,
                     nlohmann::json params)
    : dim_(dim),
      kind_(std::move(kind)),
      name_(std::move(name)),
      params_(std::move(params)) {
  if (dim_ != 1 && dim_ != 2)
    throw std::invalid_argument("AlgebraFn: dimension must be 1 or 2");
  if (const TorusLift* lift = lift_of(*this)) {
    if (lift->frequencies == 0 ||
        lift->winding.size() != lift->frequencies * static_cast<std::size_t>(dim_))
      throw std::invalid_argument("AlgebraFn: winding matrix must be m x n");
  }
}

double AlgebraFn::operator()(const Point& y) const {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Periodic>) {
          return k.rule(y);
        } else if constexpr (std::is_same_v<K, TorusLift>) {
          return k.rule(torus_angles(k, dim_, y));
        } else {
          return k.base.rule(torus_angles(k.base, dim_, y)) + k.tail(y);
        }
      },
      kind_);
}

bool AlgebraFn::has_gradient() const {
  if (const auto* p = std::get_if<Periodic>(&kind_))
    return p->gradient.has_value();
  return lift_of(*this)->gradient.has_value();
}

Point AlgebraFn::gradient(const Point& y) const {
  if (!has_gradient())
    throw MissingGradient("function '" + name_ + "' has no gradient rule");
  if (const auto* p = std::get_if<Periodic>(&kind_)) return (*p->gradient)(y);
  const TorusLift& lift = *lift_of(*this);
  const std::vector<double> g = (*lift.gradient)(torus_angles(lift, dim_, y));
  Point out{0.0, 0.0};
  for (std::size_t k = 0; k < lift.frequencies; ++k)
    for (int j = 0; j < dim_; ++j)
      out[j] += lift.winding[k * static_cast<std::size_t>(dim_) + j] * g[k];
  return out;
}

nlohmann::json AlgebraFn::describe() const {
  nlohmann::json rec;
  rec["dim"] = dim_;
  rec["name"] = name_;
  rec["parameters"] = params_;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Periodic>) {
          rec["kind"] = "periodic";
          rec["period"] = std::vector<double>(k.period.begin(),
                                              k.period.begin() + dim_);
        } else if constexpr (std::is_same_v<K, TorusLift>) {
          rec["kind"] = "torus_lift";
          rec["frequencies"] = k.frequencies;
          rec["winding"] = k.winding;
        } else {
          rec["kind"] = "perturbed";
          rec["frequencies"] = k.base.frequencies;
          rec["winding"] = k.base.winding;
          rec["decay_bound"] = k.decay_bound;
        }
      },
      kind_);
  return rec;
}

double eval(const AlgebraFn& fn, const Point& y) { return fn(y); }

double mean(const AlgebraFn& fn, const MeanOptions& opts) {
  const AlgebraFn fns[] = {fn};
  return compose_mean(fns, [](std::span<const double> c) { return c[0]; },
                      opts);
}

double compose_mean(std::span<const AlgebraFn> fns,
                    const std::function<double(std::span<const double>)>& map,
                    const MeanOptions& opts) {
  return compose_mean(fns, map, {}, opts);
}

double compose_mean(std::span<const AlgebraFn> fns,
                    const std::function<double(std::span<const double>)>& map,
                    std::span<const CoefficientSwitch> switches,
                    const MeanOptions& opts) {
  if (fns.empty()) return map({});
  const Representation rep = common_representation(fns);
  const double volume = box_volume(rep);
  quad::Options q = opts.quadrature;
  q.abs_tol = opts.quadrature.abs_tol * volume;
  if (rep.lo.size() > 1)
    q.switch_samples = std::min<std::size_t>(q.switch_samples, 256);
  std::vector<double> values(fns.size());
  const auto load = [&](std::span<const double> coord) {
    for (std::size_t k = 0; k < fns.size(); ++k)
      values[k] = native_eval(fns[k], coord, rep.torus);
  };
  const auto integrand = [&](std::span<const double> coord) {
    load(coord);
    return map(values);
  };
  std::vector<quad::BoxSwitch> box_switches;
  for (const CoefficientSwitch& sw : switches)
    box_switches.push_back([&](std::span<const double> coord) {
      load(coord);
      return sw(values);
    });
  return quad::integrate_box(integrand, rep.lo, rep.hi, q, box_switches).value /
         volume;
}

double window_mean(std::span<const AlgebraFn> fns,
                   const std::function<double(std::span<const double>)>& map,
                   double lo, double hi, const quad::Options& opts,
                   std::span<const CoefficientSwitch> switches) {
  std::vector<double> values(fns.size());
  quad::Options q = opts;
  q.abs_tol = opts.abs_tol * (hi - lo);
  const auto load = [&](double y) {
    for (std::size_t k = 0; k < fns.size(); ++k) values[k] = fns[k](y);
  };
  const auto integrand = [&](double y) {
    load(y);
    return map(values);
  };
  std::vector<quad::Switch> local;
  for (const CoefficientSwitch& sw : switches)
    local.push_back([&](double y) {
      load(y);
      return sw(values);
    });
  return quad::integrate_piecewise(integrand, lo, hi, local, q).value / (hi - lo);
}

AlgebraFn translate(const AlgebraFn& fn, const Point& shift) {
  const int dim = fn.dim();
  nlohmann::json params = fn.params();
  params["shift"] = std::vector<double>(shift.begin(), shift.begin() + dim);
  const auto shifted = [shift](const SpatialRule& rule) -> SpatialRule {
    return [rule, shift](const Point& y) {
      return rule({y[0] + shift[0], y[1] + shift[1]});
    };
  };
  const auto shifted_lift = [&](const TorusLift& lift) {
    TorusLift out = lift;
    std::vector<double> offset(lift.frequencies, 0.0);
    for (std::size_t k = 0; k < lift.frequencies; ++k)
      for (int j = 0; j < dim; ++j)
        offset[k] += lift.winding[k * static_cast<std::size_t>(dim) + j] * shift[j];
    const auto wrap = [offset](std::span<const double> theta) {
      std::vector<double> t(theta.begin(), theta.end());
      for (std::size_t k = 0; k < t.size(); ++k) t[k] = frac(t[k] + offset[k]);
      return t;
    };
    out.rule = [rule = lift.rule, wrap](std::span<const double> theta) {
      return rule(wrap(theta));
    };
    if (lift.gradient)
      out.gradient = [grad = *lift.gradient, wrap](std::span<const double> theta) {
        return grad(wrap(theta));
      };
    return out;
  };
  return std::visit(
      [&](const auto& k) -> AlgebraFn {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Periodic>) {
          Periodic p = k;
          p.rule = shifted(k.rule);
          if (k.gradient)
            p.gradient = [g = *k.gradient, shift](const Point& y) {
              return g({y[0] + shift[0], y[1] + shift[1]});
            };
          return AlgebraFn(dim, p, fn.name(), params);
        } else if constexpr (std::is_same_v<K, TorusLift>) {
          return AlgebraFn(dim, shifted_lift(k), fn.name(), params);
        } else {
          Perturbed p = k;
          p.base = shifted_lift(k.base);
          p.tail = shifted(k.tail);
          return AlgebraFn(dim, p, fn.name(), params);
        }
      },
      fn.kind());
}

double ball_average(const AlgebraFn& fn, const Point& center, double radius,
                    std::size_t points_per_unit) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_average: radius <= 0");
  const std::size_t n = std::max<std::size_t>(
      64, static_cast<std::size_t>(std::ceil(2.0 * radius *
                                             static_cast<double>(points_per_unit))));
  const double h = 2.0 * radius / static_cast<double>(n);
  if (fn.dim() == 1) {
    return quad::midpoint([&](double s) { return fn(center[0] + s); }, -radius,
                          radius, n) /
           (2.0 * radius);
  }
  std::vector<double> rows;
  rows.reserve(n);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sx = -radius + (static_cast<double>(i) + 0.5) * h;
    std::vector<double> row;
    for (std::size_t j = 0; j < n; ++j) {
      const double sy = -radius + (static_cast<double>(j) + 0.5) * h;
      if (sx * sx + sy * sy > radius * radius) continue;
      row.push_back(fn({center[0] + sx, center[1] + sy}));
    }
    inside += row.size();
    rows.push_back(quad::pairwise_sum(row));
  }
  return quad::pairwise_sum(rows) / static_cast<double>(inside);
}

std::vector<double> ergodicity_defect(const AlgebraFn& fn,
                                      std::span<const double> radii,
                                      std::span<const Point> centers,
                                      std::size_t points_per_unit) {
  if (centers.size() < 32)
    throw std::invalid_argument("ergodicity_defect: need at least 32 centers");
  const double m = mean(fn);
  std::vector<double> out;
  out.reserve(radii.size());
  for (double t : radii) {
    std::vector<double> sq(centers.size());
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = ball_average(fn, centers[c], t, points_per_unit) - m;
      sq[c] = d * d;
    }
    out.push_back(quad::pairwise_sum(sq) / static_cast<double>(centers.size()));
  }
  return out;
}

std::vector<Point> random_centers(int dim, std::size_t count, double spread,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-spread, spread);
  std::vector<Point> out(count, Point{0.0, 0.0});
  for (Point& p : out)
    for (int j = 0; j < dim; ++j) p[j] = dist(rng);
  return out;
}

std::vector<double> default_delta_schedule() { return {1e-1, 1e-2, 1e-3, 1e-4}; }

MeasureEstimate level_set_measure(
    std::span<const AlgebraFn> fns,
    const std::function<double(std::span<const double>)>& map, double alpha,
    std::span<const double> schedule, const MeanOptions& opts) {
  std::vector<double> deltas(schedule.begin(), schedule.end());
  if (deltas.empty()) deltas = default_delta_schedule();
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0) || (k > 0 && !(deltas[k] < deltas[k - 1])))
      throw std::invalid_argument(
          "level_set_measure: schedule must be positive and strictly decreasing");
  }
  MeasureEstimate est;
  est.delta_schedule = deltas;
  for (double delta : deltas) {
    MeanOptions o = opts;
    o.quadrature.abs_tol = std::max(o.quadrature.abs_tol, 1e-9);
    const CoefficientSwitch edges[] = {
        [&](std::span<const double> c) { return map(c) - alpha - delta; },
        [&](std::span<const double> c) { return map(c) - alpha + delta; }};
    const double value = compose_mean(
        fns,
        [&](std::span<const double> c) {
          return std::abs(map(c) - alpha) <= delta ? 1.0 : 0.0;
        },
        edges, o);
    est.estimates.push_back(value);
  }
  // Least-squares line through the last (up to) three points.
  const std::size_t n = std::min<std::size_t>(3, deltas.size());
  const std::size_t first = deltas.size() - n;
  if (n == 1) {
    est.extrapolated = est.estimates.back();
    est.converged = true;
    return est;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < deltas.size(); ++k) {
    sx += deltas[k];
    sy += est.estimates[k];
    sxx += deltas[k] * deltas[k];
    sxy += deltas[k] * est.estimates[k];
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  const double slope = (dn * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / dn;
  double rss = 0.0;
  for (std::size_t k = first; k < deltas.size(); ++k) {
    const double r = est.estimates[k] - (intercept + slope * deltas[k]);
    rss += r * r;
  }
  est.fit_residual = std::sqrt(rss / dn);
  const double tol = 1e-9;
  est.extrapolated = std::clamp(intercept, 0.0, est.estimates.back() + tol);
  est.converged = est.fit_residual < 1e-3;
  return est;
}

MeasureEstimate level_set_measure(const AlgebraFn& fn, double alpha,
                                  std::span<const double> schedule,
                                  const MeanOptions& opts) {
  const AlgebraFn fns[] = {fn};
  return level_set_measure(
      fns, [](std::span<const double> c) { return c[0]; }, alpha, schedule,
      opts);
}

namespace {

double regularity_margin(const AlgebraFn& fn, double alpha, std::size_t r) {
  double margin = std::numeric_limits<double>::infinity();
  const auto consider = [&](double value, std::span<const double> grad) {
    double g2 = 0.0;
    for (double g : grad) g2 += g * g;
    margin = std::min(margin, (value - alpha) * (value - alpha) + g2);
  };
  const double rd = static_cast<double>(r);
  if (const auto* p = std::get_if<Periodic>(&fn.kind())) {
    const std::size_t ny = fn.dim() == 2 ? r : 1;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        const Point y{(static_cast<double>(i) + 0.5) * p->period[0] / rd,
                      fn.dim() == 2
                          ? (static_cast<double>(j) + 0.5) * p->period[1] / rd
                          : 0.0};
        const Point g = fn.gradient(y);
        consider(fn(y), std::span<const double>(g.data(), fn.dim()));
      }
    }
    return margin;
  }
  const TorusLift& lift = *lift_of(fn);
  const int dim = fn.dim();
  std::vector<std::size_t> idx(lift.frequencies, 0);
  std::vector<double> theta(lift.frequencies);
  while (true) {
    for (std::size_t k = 0; k < lift.frequencies; ++k)
      theta[k] = (static_cast<double>(idx[k]) + 0.5) / rd;
    const std::vector<double> gt = (*lift.gradient)(theta);
    std::vector<double> gy(dim, 0.0);
    for (std::size_t k = 0; k < lift.frequencies; ++k)
      for (int j = 0; j < dim; ++j)
        gy[j] += lift.winding[k * static_cast<std::size_t>(dim) + j] * gt[k];
    consider(lift.rule(theta), gy);
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == r) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return margin;
}

}  // namespace

RegularityCertificate strongly_regular(const AlgebraFn& fn, double alpha,
                                       const RegularityOptions& opts) {
  if (!fn.has_gradient())
    throw MissingGradient("strongly_regular: function '" + fn.name() +
                          "' has no gradient rule");
  RegularityCertificate cert;
  cert.coarse_margin = regularity_margin(fn, alpha, opts.resolution);
  cert.margin = regularity_margin(fn, alpha, 2 * opts.resolution);
  const double change = std::abs(cert.margin - cert.coarse_margin) /
                        std::max(cert.coarse_margin, 1e-300);
  cert.certified = cert.margin > opts.floor && cert.coarse_margin > opts.floor &&
                   change < opts.max_relative_change;
  return cert;
}

}  // namespace homog
