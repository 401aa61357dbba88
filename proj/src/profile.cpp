#include "homog/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"

namespace homog {

MonotoneProfile::MonotoneProfile(std::vector<Knot> knots, double slope_below,
                                 double slope_above, bool allow_plateaus)
    : knots_(std::move(knots)),
      slope_below_(slope_below),
      slope_above_(slope_above),
      allow_plateaus_(allow_plateaus) {
  if (knots_.empty()) throw std::invalid_argument("MonotoneProfile: no knots");
  if (!(slope_below_ > 0.0) || !(slope_above_ > 0.0) ||
      !std::isfinite(slope_below_) || !std::isfinite(slope_above_))
    throw NonCoercive("MonotoneProfile: extension slopes must be positive");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const Knot& k = knots_[i];
    if (!std::isfinite(k.u) || !std::isfinite(k.left) || !std::isfinite(k.right))
      throw std::invalid_argument("MonotoneProfile: non-finite knot");
    if (k.right < k.left)
      throw std::invalid_argument("MonotoneProfile: decreasing jump");
    if (i == 0) continue;
    const Knot& p = knots_[i - 1];
    if (!(k.u > p.u))
      throw std::invalid_argument("MonotoneProfile: abscissae not increasing");
    if (k.left < p.right)
      throw std::invalid_argument("MonotoneProfile: values decreasing");
    if (k.left == p.right && !allow_plateaus_)
      throw std::invalid_argument(
          "MonotoneProfile: plateau in a profile not flagged type-2 capable");
  }
  cumulative_.assign(knots_.size(), 0.0);
  for (std::size_t i = 1; i < knots_.size(); ++i)
    cumulative_[i] = cumulative_[i - 1] + 0.5 * (knots_[i - 1].right + knots_[i].left) *
                                              (knots_[i].u - knots_[i - 1].u);
}

MonotoneProfile MonotoneProfile::from_points(std::span<const double> u,
                                             std::span<const double> v,
                                             double slope_below,
                                             double slope_above,
                                             bool allow_plateaus) {
  if (u.size() != v.size())
    throw std::invalid_argument("MonotoneProfile: size mismatch");
  std::vector<Knot> knots(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) knots[i] = {u[i], v[i], v[i]};
  return MonotoneProfile(std::move(knots), slope_below, slope_above,
                         allow_plateaus);
}

MonotoneProfile MonotoneProfile::linear(double slope) {
  return MonotoneProfile({Knot{0.0, 0.0, 0.0}}, slope, slope);
}

MonotoneProfile MonotoneProfile::stefan() {
  return MonotoneProfile({Knot{-0.5, 0.0, 0.0}, Knot{0.5, 0.0, 0.0}}, 1.0, 1.0,
                         true);
}

std::ptrdiff_t MonotoneProfile::locate(double u) const {
  const auto it = std::upper_bound(
      knots_.begin(), knots_.end(), u,
      [](double value, const Knot& k) { return value < k.u; });
  return (it - knots_.begin()) - 1;
}

double MonotoneProfile::left_limit(double u) const {
  const std::ptrdiff_t i = locate(u);
  if (i < 0) return knots_.front().left + slope_below_ * (u - knots_.front().u);
  const Knot& k = knots_[static_cast<std::size_t>(i)];
  if (u == k.u) return k.left;
  if (static_cast<std::size_t>(i) + 1 == knots_.size())
    return k.right + slope_above_ * (u - k.u);
  const Knot& n = knots_[static_cast<std::size_t>(i) + 1];
  return k.right + (n.left - k.right) * (u - k.u) / (n.u - k.u);
}

double MonotoneProfile::right_limit(double u) const {
  const std::ptrdiff_t i = locate(u);
  if (i >= 0 && knots_[static_cast<std::size_t>(i)].u == u)
    return knots_[static_cast<std::size_t>(i)].right;
  return left_limit(u);
}

double MonotoneProfile::operator()(double u) const {
  const std::ptrdiff_t i = locate(u);
  if (i >= 0) {
    const Knot& k = knots_[static_cast<std::size_t>(i)];
    if (k.u == u) return k.side == JumpSide::Left ? k.left : k.right;
  }
  return left_limit(u);
}

double MonotoneProfile::right_slope(double u) const {
  const std::ptrdiff_t i = locate(u);
  if (i < 0) return slope_below_;
  const std::size_t j = static_cast<std::size_t>(i);
  if (j + 1 == knots_.size()) return slope_above_;
  return (knots_[j + 1].left - knots_[j].right) / (knots_[j + 1].u - knots_[j].u);
}

double MonotoneProfile::antiderivative(double u) const {
  const Knot& first = knots_.front();
  if (u <= first.u) {
    const double d = u - first.u;
    return first.left * d + 0.5 * slope_below_ * d * d;
  }
  const std::size_t j = static_cast<std::size_t>(locate(u));
  const Knot& k = knots_[j];
  const double d = u - k.u;
  return cumulative_[j] + 0.5 * (k.right + left_limit(u)) * d;
}

double MonotoneProfile::integral(double a, double b) const {
  return antiderivative(b) - antiderivative(a);
}

bool MonotoneProfile::has_plateaus() const {
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (knots_[i].left == knots_[i - 1].right) return true;
  return false;
}

bool MonotoneProfile::has_jumps() const {
  return std::any_of(knots_.begin(), knots_.end(),
                     [](const Knot& k) { return k.right > k.left; });
}

double MonotoneProfile::min_segment_slope() const {
  double s = std::min(slope_below_, slope_above_);
  for (std::size_t i = 1; i < knots_.size(); ++i)
    s = std::min(s, (knots_[i].left - knots_[i - 1].right) /
                        (knots_[i].u - knots_[i - 1].u));
  return s;
}

double MonotoneProfile::max_segment_slope() const {
  double s = std::max(slope_below_, slope_above_);
  for (std::size_t i = 1; i < knots_.size(); ++i)
    s = std::max(s, (knots_[i].left - knots_[i - 1].right) /
                        (knots_[i].u - knots_[i - 1].u));
  return s;
}

std::string MonotoneProfile::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "u,left,right,side\n";
  for (const Knot& k : knots_)
    out << k.u << ',' << k.left << ',' << k.right << ','
        << (k.side == JumpSide::Left ? "left" : "right") << '\n';
  return out.str();
}

nlohmann::json MonotoneProfile::to_json() const {
  nlohmann::json j;
  j["slope_below"] = slope_below_;
  j["slope_above"] = slope_above_;
  j["allow_plateaus"] = allow_plateaus_;
  auto& ks = j["knots"] = nlohmann::json::array();
  for (const Knot& k : knots_)
    ks.push_back({k.u, k.left, k.right, k.side == JumpSide::Left ? "left" : "right"});
  return j;
}

GeneralizedInverse generalized_inverse(const MonotoneProfile& profile) {
  // Walk the graph as a monotone polyline; vertical pieces are jumps and
  // horizontal pieces are plateaus. Swapping coordinates swaps the roles.
  struct Vertex {
    double u, v;
  };
  std::vector<Vertex> graph;
  for (const Knot& k : profile.knots()) {
    graph.push_back({k.u, k.left});
    if (k.right > k.left) graph.push_back({k.u, k.right});
  }
  GeneralizedInverse out{MonotoneProfile::linear(1.0), {}};
  std::vector<Knot> knots;
  std::size_t i = 0;
  while (i < graph.size()) {
    std::size_t j = i;
    while (j + 1 < graph.size() && graph[j + 1].v == graph[i].v) ++j;
    Knot k{graph[i].v, graph[i].u, graph[j].u, JumpSide::Left};
    if (k.right > k.left) out.jumps.push_back(k.u);
    knots.push_back(k);
    i = j + 1;
  }
  out.inverse = MonotoneProfile(std::move(knots), 1.0 / profile.slope_below(),
                                1.0 / profile.slope_above(),
                                profile.has_jumps());
  return out;
}

}  // namespace homog
