#include <algorithm>
#include <cmath>
#include <numbers>

#include "homog/algebra.hpp"
#include "homog/errors.hpp"

namespace homog {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Representative of y in [-2, 2) modulo 4.
double reduce4(double y) { return y - 4.0 * std::floor((y + 2.0) / 4.0); }

double psi0(double y) {
  const double r = reduce4(y);
  if (r <= -1.0) return -r - 2.0;
  if (r <= 1.0) return r;
  return -r + 2.0;
}

double psi0_slope(double y) {
  const double r = reduce4(y);
  return (r < -1.0 || r >= 1.0) ? -1.0 : 1.0;
}

}  // namespace

namespace presets {

AlgebraFn stefan_psi0() {
  Periodic p;
  p.period = {4.0, 4.0};
  p.rule = [](const Point& y) { return psi0(y[0]); };
  p.gradient = [](const Point& y) { return Point{psi0_slope(y[0]), 0.0}; };
  return AlgebraFn(1, p, "stefan_psi0");
}

AlgebraFn clamped_psi0() {
  Periodic p;
  p.period = {4.0, 4.0};
  p.rule = [](const Point& y) { return std::clamp(psi0(y[0]), -0.5, 0.5); };
  p.gradient = [](const Point& y) {
    const double v = psi0(y[0]);
    return Point{std::abs(v) < 0.5 ? psi0_slope(y[0]) : 0.0, 0.0};
  };
  return AlgebraFn(1, p, "clamped_psi0");
}

AlgebraFn tent4() {
  Periodic p;
  p.period = {4.0, 4.0};
  p.rule = [](const Point& y) { return 1.0 - std::abs(reduce4(y[0])) / 2.0; };
  p.gradient = [](const Point& y) {
    return Point{reduce4(y[0]) < 0.0 ? 0.5 : -0.5, 0.0};
  };
  return AlgebraFn(1, p, "tent4");
}

AlgebraFn cosine(double amplitude, double period) {
  Periodic p;
  p.period = {period, period};
  const double k = kTwoPi / period;
  p.rule = [amplitude, k](const Point& y) { return amplitude * std::cos(k * y[0]); };
  p.gradient = [amplitude, k](const Point& y) {
    return Point{-amplitude * k * std::sin(k * y[0]), 0.0};
  };
  return AlgebraFn(1, p, "cosine", {{"amplitude", amplitude}, {"period", period}});
}

AlgebraFn cos1() {
  AlgebraFn fn = cosine(1.0, 1.0);
  return AlgebraFn(1, fn.kind(), "cos1");
}

AlgebraFn sin2pi() {
  Periodic p;
  p.period = {1.0, 1.0};
  p.rule = [](const Point& y) { return std::sin(kTwoPi * y[0]); };
  p.gradient = [](const Point& y) {
    return Point{kTwoPi * std::cos(kTwoPi * y[0]), 0.0};
  };
  return AlgebraFn(1, p, "sin2pi");
}

namespace {
TorusLift cos_sqrt2_lift() {
  TorusLift lift;
  lift.frequencies = 2;
  lift.winding = {1.0 / kTwoPi, std::numbers::sqrt2 / kTwoPi};
  lift.rule = [](std::span<const double> t) {
    return std::cos(kTwoPi * t[0]) + std::cos(kTwoPi * t[1]);
  };
  lift.gradient = [](std::span<const double> t) {
    return std::vector<double>{-kTwoPi * std::sin(kTwoPi * t[0]),
                               -kTwoPi * std::sin(kTwoPi * t[1])};
  };
  return lift;
}
}  // namespace

AlgebraFn qp_cos_sqrt2() { return AlgebraFn(1, cos_sqrt2_lift(), "qp_cos_sqrt2"); }

AlgebraFn pap_cos_decay() {
  Perturbed p;
  p.base = cos_sqrt2_lift();
  p.tail = [](const Point& y) { return 1.0 / (1.0 + std::abs(y[0])); };
  p.decay_bound = 1.0;
  return AlgebraFn(1, p, "pap_cos_decay");
}

AlgebraFn constant(double c, int dim) {
  Periodic p;
  p.period = {1.0, 1.0};
  p.rule = [c](const Point&) { return c; };
  p.gradient = [](const Point&) { return Point{0.0, 0.0}; };
  return AlgebraFn(dim, p, "constant", {{"value", c}});
}

std::vector<std::string> names() {
  return {"stefan_psi0", "clamped_psi0", "tent4", "cos1",
          "sin2pi",      "qp_cos_sqrt2", "pap_cos_decay"};
}

AlgebraFn by_name(const std::string& name) {
  if (name == "stefan_psi0") return stefan_psi0();
  if (name == "clamped_psi0") return clamped_psi0();
  if (name == "tent4") return tent4();
  if (name == "cos1") return cos1();
  if (name == "sin2pi") return sin2pi();
  if (name == "qp_cos_sqrt2") return qp_cos_sqrt2();
  if (name == "pap_cos_decay") return pap_cos_decay();
  throw ConfigError("unknown algebra preset '" + name + "'");
}

}  // namespace presets

AlgebraFn from_record(const nlohmann::json& record) {
  const std::string name = record.at("name").get<std::string>();
  const nlohmann::json params =
      record.contains("parameters") ? record.at("parameters") : nlohmann::json::object();
  AlgebraFn base = [&] {
    if (name == "constant")
      return presets::constant(params.at("value").get<double>(),
                               record.value("dim", 1));
    if (name == "cosine")
      return presets::cosine(params.at("amplitude").get<double>(),
                             params.at("period").get<double>());
    return presets::by_name(name);
  }();
  if (params.contains("shift")) {
    const auto s = params.at("shift").get<std::vector<double>>();
    Point shift{0.0, 0.0};
    for (std::size_t j = 0; j < s.size() && j < 2; ++j) shift[j] = s[j];
    return translate(base, shift);
  }
  return base;
}

}  // namespace homog
