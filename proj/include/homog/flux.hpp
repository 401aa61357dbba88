#pragma once

// Two-scale pressure functions f(x, y, u). The fast variable enters only
// through a list of algebra functions ("coefficients") evaluated at y, so
// every mean over y is a composition mean in the algebra.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "homog/algebra.hpp"
#include "homog/profile.hpp"
#include "json.hpp"

namespace homog {

struct Interval {
  double a = 0.0;
  double b = 1.0;
  double length() const { return b - a; }
};

using CoefficientRule = std::function<double(double x, std::span<const double> c)>;
using PressureRule =
    std::function<double(double x, std::span<const double> c, double u)>;

/// Strictly increasing in u; g is its inverse in u.
struct Type1Law {
  PressureRule f;
  PressureRule g;
  std::optional<PressureRule> df;
};

/// f = h F(u) + S with F nondecreasing (plateaus allowed) and h >= delta0.
struct Type2Law {
  CoefficientRule h;
  CoefficientRule S;
  MonotoneProfile F;
  MonotoneProfile G;           // minimal generalized inverse of F
  std::vector<double> jumps;   // discontinuity set E of G
};

class Flux {
 public:
  static Flux type1(std::string id, Interval domain,
                    std::vector<AlgebraFn> coefficients, PressureRule f,
                    PressureRule g, std::optional<PressureRule> df = {},
                    bool x_dependent = false);
  static Flux type2(std::string id, Interval domain,
                    std::vector<AlgebraFn> coefficients, CoefficientRule h,
                    CoefficientRule S, MonotoneProfile F,
                    bool x_dependent = false);

  int type() const { return std::holds_alternative<Type1Law>(law_) ? 1 : 2; }
  const std::string& id() const { return id_; }
  const Interval& domain() const { return domain_; }
  std::span<const AlgebraFn> coefficients() const { return coefficients_; }
  bool x_dependent() const { return x_dependent_; }
  bool oscillates() const { return !coefficients_.empty(); }
  const Type1Law* type1_law() const { return std::get_if<Type1Law>(&law_); }
  const Type2Law* type2_law() const { return std::get_if<Type2Law>(&law_); }
  nlohmann::json describe() const;
  Flux with_domain(Interval domain) const;

  std::vector<double> coefficient_values(const Point& y) const;

  // Pressure law in coefficient space: c = coefficient_values(y).
  double f(double x, std::span<const double> c, double u) const;
  /// Inverse in u; at jumps of a type-2 inverse the right limit is taken.
  double g(double x, std::span<const double> c, double v) const;
  /// Right derivative in u.
  double df(double x, std::span<const double> c, double u) const;

 private:
  Flux(std::string id, Interval domain, std::vector<AlgebraFn> coefficients,
       std::variant<Type1Law, Type2Law> law, bool x_dependent);

  std::string id_;
  Interval domain_;
  std::vector<AlgebraFn> coefficients_;
  std::variant<Type1Law, Type2Law> law_;
  bool x_dependent_;
};

double flux_eval(const Flux& flux, double x, const Point& y, double u);
double pressure_inverse_eval(const Flux& flux, double x, const Point& y,
                             double v);

/// Switches alpha h + S - v, one per jump alpha of a type-2 inverse; empty
/// for type 1.
std::vector<CoefficientSwitch> jump_switches(const Flux& flux, double x, double v);

/// Mean over the fast variable of the pressure inverse g(x, ., v).
double homogenized_g(const Flux& flux, double x, double v,
                     const MeanOptions& opts = {});

/// G_*(x, y, v) = integral of g(x, y, s) over s in [0, v].
double g_star(const Flux& flux, double x, const Point& y, double v);
double gbar_star(const Flux& flux, double x, double v,
                 const MeanOptions& opts = {});

/// (1-t) Gbar_*(v1) + t Gbar_*(v2) - Gbar_*((1-t) v1 + t v2).
double convexity_gap(const Flux& flux, double x, double v1, double v2,
                     double theta, const MeanOptions& opts = {});
/// Lower bound C t (1-t) (v2-v1)^2 with C = min_slope / 2.
double convexity_bound(double min_slope, double v1, double v2, double theta);

struct ValidationOptions {
  double u_lo = -4.0;
  double u_hi = 4.0;
  std::size_t resolution = 64;
  double h_floor = 1e-3;  // delta_0
  double boundary_tol = 1e-12;
  /// Scales at which the boundary pressure f(x, x/eps, 0) is probed.
  std::vector<double> boundary_epsilons = {0.25, 0.125, 0.0625, 0.03125};
};

struct FluxReport {
  std::size_t monotonicity_violations = 0;
  double lipschitz = 0.0;
  double min_h = 0.0;
  double max_boundary_pressure = 0.0;
  double witness_hi = 0.0;  // min over (x,y) of f(u_hi) - f(0)
  double witness_lo = 0.0;  // max over (x,y) of f(u_lo) - f(0)
  bool coercive = false;
  double fbar_lipschitz_bound = 0.0;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  nlohmann::json to_json() const;
};

/// Scans the flux on a sample grid; throws ValidationFailure listing the
/// violated clauses.
FluxReport validate_flux(const Flux& flux, const ValidationOptions& opts = {});
/// Same scan without throwing.
FluxReport inspect_flux(const Flux& flux, const ValidationOptions& opts = {});

namespace flux_presets {

/// h = 1, S = amplitude * psi0(y), F = Stefan law, on (-2, 2).
Flux stefan(double amplitude = 1.0);
/// Type 2 with S = 0 and no oscillation: violates the level-set condition.
Flux stefan_flat();
Flux heat();
/// f = u^3 + u.
Flux cubic();
/// f = u^3.
Flux pure_cubic();
/// f = (2 + cos(2 pi y)) u; the homogenized flux is sqrt(3) u.
Flux harmonic();

/// {"preset": name, ...parameters}; throws ConfigError.
Flux from_json(const nlohmann::json& spec);
std::vector<std::string> names();

}  // namespace flux_presets

}  // namespace homog
