#include "homog/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>

#include "homog/errors.hpp"

namespace homog::quad {
namespace {

constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
};

struct ByError {
  bool operator()(const Segment& l, const Segment& r) const {
    if (l.error != r.error) return l.error < r.error;
    return l.a > r.a;
  }
};

// Barycentric weights of the 15 Kronrod nodes, for evaluating their
// interpolating polynomial at the interval ends.
struct EndpointWeights {
  std::array<double, 15> t{}, w{};
  EndpointWeights() {
    for (std::size_t j = 0; j < 7; ++j) {
      t[j] = -kNodes[j];
      t[14 - j] = kNodes[j];
    }
    t[7] = 0.0;
    for (std::size_t j = 0; j < 15; ++j) {
      double p = 1.0;
      for (std::size_t k = 0; k < 15; ++k)
        if (k != j) p *= t[j] - t[k];
      w[j] = 1.0 / p;
    }
  }
  double extrapolate(const std::array<double, 15>& f, double at) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < 15; ++j) {
      const double c = w[j] / (at - t[j]);
      num += c * f[j];
      den += c;
    }
    return num / den;
  }
};

const EndpointWeights kEndpoints;

// A kink or jump between an end and the outermost node is invisible to
// both rules; it shows up as a mismatch between the end value and the
// interpolant of the nodes. A kink at distance d from the end changes the
// integral by about d * mismatch / 2, and d < 0.0086 h.
constexpr double kEndpointFactor = 0.005;

Segment kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, 15> fv{};
  fv[7] = f(c);
  double k = kKronrod[7] * fv[7];
  double g = kGauss[3] * fv[7];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = h * kNodes[j];
    fv[j] = f(c - dx);
    fv[14 - j] = f(c + dx);
    const double s = fv[j] + fv[14 - j];
    k += kKronrod[j] * s;
    if (j % 2 == 1) g += kGauss[j / 2] * s;
  }
  double error = std::abs((k - g) * h);
  // Ends are sampled just inside so a cut placed exactly on a jump does not
  // read the value from the neighbouring piece.
  const double nudge = 8.0 * 2.2e-16 * std::max({1.0, std::abs(a), std::abs(b)});
  if (2.0 * nudge < b - a) {
    const double fa = f(a + nudge), fb = f(b - nudge);
    const double mismatch = std::abs(fa - kEndpoints.extrapolate(fv, -1.0)) +
                            std::abs(fb - kEndpoints.extrapolate(fv, 1.0));
    error = std::max(error, kEndpointFactor * 2.0 * h * mismatch);
  }
  return {a, b, k * h, error};
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts) {
  if (a == b) return {};
  if (a > b) {
    Result r = integrate(f, b, a, opts);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<Segment, std::vector<Segment>, ByError> queue;
  std::vector<Segment> frozen;  // too narrow to bisect further
  const std::size_t pieces = std::max<std::size_t>(1, opts.initial_pieces);
  double total_error = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    const double lo = a + (b - a) * static_cast<double>(i) / pieces;
    const double hi = i + 1 == pieces
                          ? b
                          : a + (b - a) * static_cast<double>(i + 1) / pieces;
    Segment s = kronrod(f, lo, hi);
    total_error += s.error;
    queue.push(s);
  }
  std::size_t count = pieces;
  const std::size_t budget = opts.max_intervals + pieces;
  while (total_error > opts.abs_tol && !queue.empty()) {
    if (count >= budget) break;
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 64.0 * 2.2e-16 * std::max(1.0, std::abs(mid))) {
      frozen.push_back(worst);
      continue;
    }
    Segment left = kronrod(f, worst.a, mid);
    Segment right = kronrod(f, mid, worst.b);
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  // Segments at rounding width cannot be refined; a bounded integrand
  // contributes at most width * oscillation there.
  double refinable_error = 0.0;
  std::vector<Segment> all = std::move(frozen);
  while (!queue.empty()) {
    refinable_error += queue.top().error;
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const Segment& l, const Segment& r) { return l.a < r.a; });
  std::vector<double> values(all.size()), errors(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    values[i] = all[i].value;
    errors[i] = all[i].error;
  }
  Result out{pairwise_sum(values), pairwise_sum(errors), all.size()};
  if (refinable_error > opts.abs_tol) {
    std::ostringstream msg;
    msg << "adaptive quadrature on [" << a << ", " << b
        << "] did not reach tolerance " << opts.abs_tol << " (estimate "
        << out.error << " after " << out.intervals << " intervals)";
    throw NonConvergedQuadrature(msg.str(), out.error);
  }
  return out;
}

namespace {

void bisect_for_zero(const Switch& s, double a, double sa, double b, double sb,
                     double lipschitz, int depth, std::vector<double>& out) {
  if (sa == 0.0) {
    out.push_back(a);
    return;
  }
  if ((sa < 0.0) != (sb < 0.0)) {
    // Plain sign change: bisect to full precision.
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (!(m > a && m < b)) break;
      const double sm = s(m);
      if (sm == 0.0) {
        a = b = m;
        break;
      }
      ((sm < 0.0) == (sa < 0.0) ? a : b) = m;
      if ((sm < 0.0) == (sa < 0.0)) sa = sm;
    }
    out.push_back(0.5 * (a + b));
    return;
  }
  // Same sign at both ends: a zero is only possible when the ends are
  // within reach of each other at the local slope bound.
  if (depth >= 60 || std::abs(sa) + std::abs(sb) > lipschitz * (b - a)) return;
  const double m = 0.5 * (a + b);
  if (!(m > a && m < b)) return;
  const double sm = s(m);
  bisect_for_zero(s, a, sa, m, sm, lipschitz, depth + 1, out);
  bisect_for_zero(s, m, sm, b, sb, lipschitz, depth + 1, out);
}

}  // namespace

std::vector<double> switch_points(std::span<const Switch> switches, double a,
                                  double b, std::size_t samples) {
  std::vector<double> out;
  const std::size_t n = std::max<std::size_t>(samples, 8);
  std::vector<double> y(n + 1), v(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    y[i] = i == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
  for (const Switch& s : switches) {
    for (std::size_t i = 0; i <= n; ++i) v[i] = s(y[i]);
    for (std::size_t i = 0; i < n; ++i) {
      double slope = 0.0;
      const std::size_t lo = i >= 2 ? i - 2 : 0, hi = std::min(n - 1, i + 2);
      for (std::size_t j = lo; j <= hi; ++j)
        slope = std::max(slope, std::abs(v[j + 1] - v[j]) / (y[j + 1] - y[j]));
      if (std::abs(v[i]) == 0.0 && std::abs(v[i + 1]) == 0.0) continue;
      bisect_for_zero(s, y[i], v[i], y[i + 1], v[i + 1], 4.0 * slope, 0, out);
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> unique;
  for (double t : out)
    if (t > a && t < b && (unique.empty() || t > unique.back())) unique.push_back(t);
  return unique;
}

Result integrate_piecewise(const std::function<double(double)>& f, double a,
                           double b, std::span<const Switch> switches,
                           const Options& opts) {
  if (switches.empty() || a == b) return integrate(f, a, b, opts);
  if (a > b) {
    Result r = integrate_piecewise(f, b, a, switches, opts);
    r.value = -r.value;
    return r;
  }
  std::vector<double> cuts = switch_points(switches, a, b, opts.switch_samples);
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);
  std::vector<double> values, errors;
  std::size_t intervals = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double width = cuts[i + 1] - cuts[i];
    if (!(width > 0.0)) continue;
    Options o = opts;
    o.abs_tol = opts.abs_tol * width / (b - a);
    o.initial_pieces = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(opts.initial_pieces) *
                                              width / (b - a))));
    const Result r = integrate(f, cuts[i], cuts[i + 1], o);
    values.push_back(r.value);
    errors.push_back(r.error);
    intervals += r.intervals;
  }
  return {pairwise_sum(values), pairwise_sum(errors), intervals};
}

Result integrate_box(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> lo, std::span<const double> hi,
                     const Options& opts, std::span<const BoxSwitch> switches) {
  const std::size_t dim = lo.size();
  if (dim == 0) return {f({}), 0.0, 1};
  std::vector<double> point(dim);
  // Recursive lambda integrating over axes [axis, dim) with the leading
  // coordinates already fixed in `point`.
  std::function<Result(std::size_t, double)> level = [&](std::size_t axis,
                                                          double tol) {
    Options o = opts;
    o.abs_tol = tol;
    if (axis + 1 == dim) {
      const std::vector<double> fixed = point;
      std::vector<Switch> local;
      for (const BoxSwitch& s : switches)
        local.push_back([&s, fixed, axis](double t) {
          std::vector<double> p = fixed;
          p[axis] = t;
          return s(p);
        });
      return integrate_piecewise(
          [&](double t) {
            point[axis] = t;
            return f(point);
          },
          lo[axis], hi[axis], local, o);
    }
    // Inner errors accumulate over the outer axis; keep them a decade below.
    const double inner_tol = 0.1 * tol / (hi[axis] - lo[axis]);
    return integrate(
        [&](double t) {
          point[axis] = t;
          return level(axis + 1, inner_tol).value;
        },
        lo[axis], hi[axis], o);
  };
  return level(0, opts.abs_tol);
}

double midpoint(const std::function<double(double)>& f, double a, double b,
                std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i)
    values[i] = f(a + (static_cast<double>(i) + 0.5) * h);
  return pairwise_sum(values) * h;
}

}  // namespace homog::quad
