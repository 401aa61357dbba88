#include <cmath>
#include <numbers>

#include "homog/errors.hpp"
#include "homog/flux.hpp"

namespace homog::flux_presets {
namespace {

constexpr Interval kStefanDomain{-2.0, 2.0};

double cubic_inverse(double v) {
  // Real root of u^3 + u = v, polished by Newton.
  const double d = std::sqrt(0.25 * v * v + 1.0 / 27.0);
  double u = std::cbrt(0.5 * v + d) + std::cbrt(0.5 * v - d);
  for (int it = 0; it < 3; ++it) u -= (u * u * u + u - v) / (3.0 * u * u + 1.0);
  return u;
}

}  // namespace

Flux stefan(double amplitude) {
  AlgebraFn psi = presets::stefan_psi0();
  return Flux::type2(
      "stefan", kStefanDomain, {psi},
      [](double, std::span<const double>) { return 1.0; },
      [amplitude](double, std::span<const double> c) { return amplitude * c[0]; },
      MonotoneProfile::stefan());
}

Flux stefan_flat() {
  return Flux::type2(
      "stefan_flat", kStefanDomain, {},
      [](double, std::span<const double>) { return 1.0; },
      [](double, std::span<const double>) { return 0.0; },
      MonotoneProfile::stefan());
}

Flux heat() {
  return Flux::type1(
      "heat", Interval{0.0, 1.0}, {},
      [](double, std::span<const double>, double u) { return u; },
      [](double, std::span<const double>, double v) { return v; },
      [](double, std::span<const double>, double) { return 1.0; });
}

Flux cubic() {
  return Flux::type1(
      "cubic", kStefanDomain, {},
      [](double, std::span<const double>, double u) { return u * u * u + u; },
      [](double, std::span<const double>, double v) { return cubic_inverse(v); },
      [](double, std::span<const double>, double u) { return 3.0 * u * u + 1.0; });
}

Flux pure_cubic() {
  return Flux::type1(
      "pure_cubic", kStefanDomain, {},
      [](double, std::span<const double>, double u) { return u * u * u; },
      [](double, std::span<const double>, double v) { return std::cbrt(v); },
      [](double, std::span<const double>, double u) { return 3.0 * u * u; });
}

Flux harmonic() {
  return Flux::type1(
      "harmonic", kStefanDomain, {presets::cos1()},
      [](double, std::span<const double> c, double u) { return (2.0 + c[0]) * u; },
      [](double, std::span<const double> c, double v) { return v / (2.0 + c[0]); },
      [](double, std::span<const double> c, double) { return 2.0 + c[0]; });
}

std::vector<std::string> names() {
  return {"stefan", "stefan_flat", "heat", "cubic", "pure_cubic", "harmonic"};
}

Flux from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ConfigError("flux: expected an object");
  for (const auto& [key, value] : spec.items())
    if (key != "preset" && key != "amplitude" && key != "domain")
      throw ConfigError("flux: unknown key '" + key + "'");
  if (!spec.contains("preset")) throw ConfigError("flux: missing key 'preset'");
  const std::string name = spec.at("preset").get<std::string>();
  if (spec.contains("amplitude") && name != "stefan")
    throw ConfigError("flux: 'amplitude' only applies to the stefan preset");
  Flux flux = [&] {
    if (name == "stefan") return stefan(spec.value("amplitude", 1.0));
    if (name == "stefan_flat") return stefan_flat();
    if (name == "heat") return heat();
    if (name == "cubic") return cubic();
    if (name == "pure_cubic") return pure_cubic();
    if (name == "harmonic") return harmonic();
    throw ConfigError("flux: unknown preset '" + name + "'");
  }();
  if (spec.contains("domain")) {
    const auto d = spec.at("domain").get<std::vector<double>>();
    if (d.size() != 2 || !(d[1] > d[0]))
      throw ConfigError("flux: 'domain' must be [a, b] with a < b");
    flux = flux.with_domain({d[0], d[1]});
  }
  return flux;
}

}  // namespace homog::flux_presets
