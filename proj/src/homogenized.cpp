#include "homog/homogenized.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {
namespace {

struct Piece {
  double a, ga, b, gb, m, gm;
  double key;  // refinement priority; negative means final
};

struct ByKey {
  bool operator()(const Piece& l, const Piece& r) const {
    if (l.key != r.key) return l.key < r.key;
    return l.a > r.a;
  }
};

}  // namespace

GbarSampling sample_monotone(const std::function<double(double)>& gbar,
                             const TableOptions& opts) {
  double lo = -1.0, hi = 1.0;
  double glo = gbar(lo), ghi = gbar(hi);
  for (int it = 0; glo > opts.u_lo; ++it) {
    if (it > 60) throw NonCoercive("mean pressure inverse is bounded below");
    lo = 2.0 * lo;
    glo = gbar(lo);
  }
  for (int it = 0; ghi < opts.u_hi; ++it) {
    if (it > 60) throw NonCoercive("mean pressure inverse is bounded above");
    hi = 2.0 * hi;
    ghi = gbar(hi);
  }
  const std::size_t n = std::max<std::size_t>(opts.base_points, 3);
  std::vector<double> bv(n), bg(n);
  for (std::size_t i = 0; i < n; ++i) {
    bv[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    bg[i] = i == 0 ? glo : (i + 1 == n ? ghi : gbar(bv[i]));
  }
  std::vector<double> slopes;
  for (std::size_t i = 1; i < n; ++i)
    slopes.push_back((bg[i] - bg[i - 1]) / (bv[i] - bv[i - 1]));
  std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
  const double median = slopes[slopes.size() / 2];

  // Largest chord deviation first; nearly flat pieces ahead of everything.
  const auto make = [&](double a, double ga, double b, double gb) {
    Piece p{a, ga, b, gb, 0.5 * (a + b), 0.0, -1.0};
    const double width = b - a;
    if (width <= opts.min_width) return p;
    p.gm = gbar(p.m);
    const double deviation = std::abs(p.gm - 0.5 * (ga + gb));
    const bool flat = (gb - ga) / width < opts.flat_fraction * median &&
                      width > opts.flat_min_width;
    if (flat)
      p.key = 1e300 * std::min(1.0, width);
    else if (deviation > opts.linearity_tol)
      p.key = deviation;
    return p;
  };
  std::priority_queue<Piece, std::vector<Piece>, ByKey> queue;
  std::vector<Piece> done;
  for (std::size_t i = 1; i < n; ++i) queue.push(make(bv[i - 1], bg[i - 1], bv[i], bg[i]));
  std::size_t knots = n;
  while (!queue.empty() && queue.top().key > 0.0 && knots < opts.max_knots) {
    const Piece p = queue.top();
    queue.pop();
    queue.push(make(p.a, p.ga, p.m, p.gm));
    queue.push(make(p.m, p.gm, p.b, p.gb));
    ++knots;
  }
  while (!queue.empty()) {
    done.push_back(queue.top());
    queue.pop();
  }
  std::sort(done.begin(), done.end(),
            [](const Piece& l, const Piece& r) { return l.a < r.a; });
  GbarSampling out;
  out.v.push_back(done.front().a);
  out.gbar.push_back(done.front().ga);
  for (const Piece& p : done) {
    out.v.push_back(p.b);
    out.gbar.push_back(p.gb);
  }
  return out;
}

namespace {

void require_increasing(const GbarSampling& s) {
  for (std::size_t i = 1; i < s.v.size(); ++i) {
    if (!(s.gbar[i] > s.gbar[i - 1])) {
      std::ostringstream msg;
      msg << "mean pressure inverse is not strictly increasing near v = " << s.v[i];
      throw Em0Violation(msg.str(), 0.0, 0.0, s.v[i], s.v[i] - s.v[i - 1]);
    }
  }
}

}  // namespace

MonotoneProfile forward_profile(const GbarSampling& s) {
  require_increasing(s);
  const std::size_t n = s.v.size();
  const double below = (s.gbar[1] - s.gbar[0]) / (s.v[1] - s.v[0]);
  const double above = (s.gbar[n - 1] - s.gbar[n - 2]) / (s.v[n - 1] - s.v[n - 2]);
  return MonotoneProfile::from_points(s.v, s.gbar, below, above);
}

MonotoneProfile inverse_profile(const GbarSampling& s) {
  require_increasing(s);
  const std::size_t n = s.v.size();
  const double below = (s.v[1] - s.v[0]) / (s.gbar[1] - s.gbar[0]);
  const double above = (s.v[n - 1] - s.v[n - 2]) / (s.gbar[n - 1] - s.gbar[n - 2]);
  return MonotoneProfile::from_points(s.gbar, s.v, below, above);
}

HomogenizedFlux::HomogenizedFlux(
    std::vector<double> x_grid,
    std::vector<std::shared_ptr<const MonotoneProfile>> fbar,
    std::vector<std::shared_ptr<const MonotoneProfile>> gbar,
    std::vector<GbarSampling> samples, std::vector<Em0Entry> em0_report,
    std::string flux_id)
    : x_grid_(std::move(x_grid)),
      fbar_(std::move(fbar)),
      gbar_(std::move(gbar)),
      samples_(std::move(samples)),
      em0_report_(std::move(em0_report)),
      flux_id_(std::move(flux_id)) {
  if (x_grid_.empty() || fbar_.size() != x_grid_.size() ||
      gbar_.size() != x_grid_.size())
    throw std::invalid_argument("HomogenizedFlux: inconsistent tables");
}

namespace {

template <class Eval>
double interpolate_in_x(const std::vector<double>& xs, double x, Eval eval) {
  if (xs.size() == 1 || x <= xs.front()) return eval(0);
  if (x >= xs.back()) return eval(xs.size() - 1);
  const std::size_t j = static_cast<std::size_t>(
      std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return (1.0 - w) * eval(j - 1) + w * eval(j);
}

}  // namespace

double HomogenizedFlux::operator()(double x, double u) const {
  return interpolate_in_x(x_grid_, x, [&](std::size_t i) { return (*fbar_[i])(u); });
}

double HomogenizedFlux::gbar(double x, double v) const {
  return interpolate_in_x(x_grid_, x, [&](std::size_t i) { return (*gbar_[i])(v); });
}

double HomogenizedFlux::slope(double x, double u) const {
  return interpolate_in_x(x_grid_, x, [&](std::size_t i) { return fbar_[i]->right_slope(u); });
}

double HomogenizedFlux::min_slope() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& p : fbar_) s = std::min(s, p->min_segment_slope());
  return s;
}

double HomogenizedFlux::max_slope() const {
  double s = 0.0;
  for (const auto& p : fbar_) s = std::max(s, p->max_segment_slope());
  return s;
}

nlohmann::json HomogenizedFlux::header() const {
  nlohmann::json em0 = nlohmann::json::array();
  for (const Em0Entry& e : em0_report_)
    em0.push_back({{"alpha", e.alpha},
                   {"x", e.x},
                   {"v", e.v},
                   {"mass", e.mass},
                   {"converged", e.converged}});
  return {{"flux", flux_id_},
          {"x_points", x_grid_.size()},
          {"fbar_min_slope", min_slope()},
          {"fbar_max_slope", max_slope()},
          {"em0_report", em0}};
}

std::string HomogenizedFlux::to_csv(std::span<const double> u_grid) const {
  std::ostringstream out;
  out.precision(17);
  out << "x,u,fbar\n";
  for (std::size_t i = 0; i < x_grid_.size(); ++i)
    for (double u : u_grid)
      out << x_grid_[i] << ',' << u << ',' << (*fbar_[i])(u) << '\n';
  return out.str();
}

std::vector<Em0Entry> check_em0(const Flux& flux, std::span<const double> x_grid,
                                const HomogenizedFluxOptions& opts) {
  std::vector<Em0Entry> report;
  const Type2Law* law = flux.type2_law();
  if (law == nullptr || law->jumps.empty()) return report;
  std::vector<double> xs;
  if (!flux.x_dependent() || x_grid.size() <= 1) {
    xs.push_back(x_grid.empty() ? flux.domain().a : x_grid.front());
  } else {
    const std::size_t m = std::min(opts.em0_max_x, x_grid.size());
    for (std::size_t k = 0; k < m; ++k)
      xs.push_back(x_grid[k * (x_grid.size() - 1) / std::max<std::size_t>(m - 1, 1)]);
  }
  const std::span<const AlgebraFn> coeffs = flux.coefficients();
  double extent = 64.0;
  if (!coeffs.empty())
    if (const auto* p = std::get_if<Periodic>(&coeffs[0].kind())) extent = p->period[0];
  for (double alpha : law->jumps) {
    for (double x : xs) {
      const auto level = [&](std::span<const double> c) {
        return alpha * law->h(x, c) + law->S(x, c);
      };
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      const std::size_t ns = coeffs.empty() ? 1 : 1024;
      for (std::size_t j = 0; j < ns; ++j) {
        const std::vector<double> c = flux.coefficient_values(
            {extent * (static_cast<double>(j) + 0.5) / static_cast<double>(ns), 0.0});
        const double val = level(c);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
      const std::size_t probes = hi - lo > 1e-14 ? std::max<std::size_t>(opts.em0_probes, 2) : 1;
      for (std::size_t k = 0; k < probes; ++k) {
        const double v = probes == 1
                             ? lo
                             : lo + (hi - lo) * static_cast<double>(k) /
                                        static_cast<double>(probes - 1);
        const MeasureEstimate est =
            level_set_measure(coeffs, level, v, opts.em0_schedule, opts.mean);
        report.push_back({alpha, x, v, est.extrapolated, est.converged});
        if (est.extrapolated >= opts.em0_tol) {
          std::ostringstream msg;
          msg << "level set {" << alpha << " h + S = " << v << "} at x = " << x
              << " has mass " << est.extrapolated;
          throw Em0Violation(msg.str(), alpha, x, v, est.extrapolated);
        }
      }
    }
  }
  return report;
}

HomogenizedFlux homogenized_f(const Flux& flux, std::span<const double> x_grid,
                              const HomogenizedFluxOptions& opts) {
  std::vector<double> xs(x_grid.begin(), x_grid.end());
  if (xs.empty()) xs.push_back(0.5 * (flux.domain().a + flux.domain().b));
  std::vector<Em0Entry> em0 = check_em0(flux, xs, opts);

  std::vector<std::shared_ptr<const MonotoneProfile>> fbar, gbar;
  std::vector<GbarSampling> samples;
  const auto build = [&](double x) {
    GbarSampling s = sample_monotone(
        [&](double v) { return homogenized_g(flux, x, v, opts.mean); }, opts.table);
    fbar.push_back(std::make_shared<const MonotoneProfile>(inverse_profile(s)));
    gbar.push_back(std::make_shared<const MonotoneProfile>(forward_profile(s)));
    samples.push_back(std::move(s));
  };
  if (flux.x_dependent()) {
    for (double x : xs) build(x);
  } else {
    build(xs.front());
    for (std::size_t i = 1; i < xs.size(); ++i) {
      fbar.push_back(fbar.front());
      gbar.push_back(gbar.front());
      samples.push_back(samples.front());
    }
  }
  return HomogenizedFlux(std::move(xs), std::move(fbar), std::move(gbar),
                         std::move(samples), std::move(em0), flux.id());
}

}  // namespace homog
