#pragma once

// Functions with a mean value: periodic closed forms, quasi-periodic
// functions lifted from a torus, and quasi-periodic functions plus a tail
// vanishing at infinity. The compact space of the algebra is never built;
// every integral over it is computed as a mean of a composition.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "homog/quadrature.hpp"
#include "json.hpp"

namespace homog {

/// A point of R^n, n in {1, 2}. One-dimensional functions ignore y[1].
using Point = std::array<double, 2>;

using SpatialRule = std::function<double(const Point&)>;
using SpatialGradient = std::function<Point(const Point&)>;
using TorusRule = std::function<double(std::span<const double>)>;
using TorusGradient = std::function<std::vector<double>(std::span<const double>)>;

struct Periodic {
  Point period{1.0, 1.0};
  SpatialRule rule;
  std::optional<SpatialGradient> gradient;
};

/// eval(y) = rule(frac(winding * y)). The rows of the m x n winding matrix
/// are assumed rationally independent; that is the caller's declaration.
struct TorusLift {
  std::size_t frequencies = 1;
  std::vector<double> winding;  // m x n, row-major
  TorusRule rule;
  std::optional<TorusGradient> gradient;  // d rule / d theta
};

/// A torus-lift base plus a tail with |tail(y)| <= decay_bound / (1 + |y|).
struct Perturbed {
  TorusLift base;
  SpatialRule tail;
  double decay_bound = 1.0;
};

class AlgebraFn {
 public:
  using Kind = std::variant<Periodic, TorusLift, Perturbed>;

  AlgebraFn(int dim, Kind kind, std::string name = "custom",
            nlohmann::json params = nlohmann::json::object());

  int dim() const { return dim_; }
  const Kind& kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const nlohmann::json& params() const { return params_; }

  double operator()(const Point& y) const;
  double operator()(double y) const { return (*this)({y, 0.0}); }

  bool has_gradient() const;
  /// Gradient in y-coordinates (chain rule through the winding matrix for
  /// torus lifts). Throws MissingGradient.
  Point gradient(const Point& y) const;

  /// Structured record {dim, kind, name, parameters}.
  nlohmann::json describe() const;

 private:
  int dim_;
  Kind kind_;
  std::string name_;
  nlohmann::json params_;
};

struct MeanOptions {
  quad::Options quadrature{};
};

double eval(const AlgebraFn& fn, const Point& y);

/// Mean value over one period cell or over the torus [0,1)^m. Perturbed
/// functions contribute the mean of their base only.
double mean(const AlgebraFn& fn, const MeanOptions& opts = {});

/// Mean of y -> map(f_1(y), ..., f_k(y)). All functions must share one
/// representation (same period cell, or same winding matrix).
double compose_mean(std::span<const AlgebraFn> fns,
                    const std::function<double(std::span<const double>)>& map,
                    const MeanOptions& opts = {});

/// Functions of the coefficient values whose sign changes mark the jumps
/// of a composition.
using CoefficientSwitch = std::function<double(std::span<const double>)>;

/// compose_mean for maps that may jump where a switch changes sign.
double compose_mean(std::span<const AlgebraFn> fns,
                    const std::function<double(std::span<const double>)>& map,
                    std::span<const CoefficientSwitch> switches,
                    const MeanOptions& opts = {});

/// Mean of y -> map(f_1(y), ..., f_k(y)) over the 1-D window [lo, hi]
/// (not a period cell). Used for cell averages of fast coefficients.
double window_mean(std::span<const AlgebraFn> fns,
                   const std::function<double(std::span<const double>)>& map,
                   double lo, double hi, const quad::Options& opts = {},
                   std::span<const CoefficientSwitch> switches = {});

/// y -> fn(y + shift).
AlgebraFn translate(const AlgebraFn& fn, const Point& shift);

/// Average of fn over the ball B(center, radius), midpoint rule with at
/// least `points_per_unit` samples per unit length.
double ball_average(const AlgebraFn& fn, const Point& center, double radius,
                    std::size_t points_per_unit = 256);

/// For each radius t: average over the centers of |ball_average - mean|^2.
std::vector<double> ergodicity_defect(const AlgebraFn& fn,
                                      std::span<const double> radii,
                                      std::span<const Point> centers,
                                      std::size_t points_per_unit = 256);

/// Uniform random centers in [-spread, spread]^dim, seeded.
std::vector<Point> random_centers(int dim, std::size_t count, double spread,
                                  std::uint64_t seed);

struct MeasureEstimate {
  std::vector<double> delta_schedule;
  std::vector<double> estimates;
  double extrapolated = 0.0;
  double fit_residual = 0.0;
  bool converged = false;
};

std::vector<double> default_delta_schedule();

/// Estimates the mean of the indicator of {|map(f(y)) - alpha| <= delta_k}
/// and extrapolates the last three estimates linearly to delta = 0.
MeasureEstimate level_set_measure(
    std::span<const AlgebraFn> fns,
    const std::function<double(std::span<const double>)>& map, double alpha,
    std::span<const double> schedule, const MeanOptions& opts = {});

MeasureEstimate level_set_measure(const AlgebraFn& fn, double alpha,
                                  std::span<const double> schedule = {},
                                  const MeanOptions& opts = {});

struct RegularityOptions {
  std::size_t resolution = 256;  // samples per axis per cell
  double floor = 1e-6;
  double max_relative_change = 0.1;
};

struct RegularityCertificate {
  bool certified = false;
  double margin = 0.0;         // at the finer resolution
  double coarse_margin = 0.0;  // at `resolution`
};

/// min over a sample grid of |psi - alpha|^2 + |grad psi|^2, evaluated at
/// two resolutions differing by 2x. Throws MissingGradient.
RegularityCertificate strongly_regular(const AlgebraFn& fn, double alpha,
                                       const RegularityOptions& opts = {});

namespace presets {

/// Period-4 tent: -y-2 on [-2,-1], y on [-1,1], -y+2 on [1,2].
AlgebraFn stefan_psi0();
/// stefan_psi0 clamped to [-1/2, 1/2]; plateaus on a quarter period each.
AlgebraFn clamped_psi0();
/// Period-4 tent 1 - |y|/2 on [-2,2], values in [0,1].
AlgebraFn tent4();
/// cos(2 pi y), period 1.
AlgebraFn cos1();
/// sin(2 pi y), period 1.
AlgebraFn sin2pi();
/// cos(y) + cos(sqrt(2) y) as a torus lift with m = 2.
AlgebraFn qp_cos_sqrt2();
/// qp_cos_sqrt2 plus the tail 1 / (1 + |y|).
AlgebraFn pap_cos_decay();
AlgebraFn constant(double c, int dim = 1);
/// a * cos(2 pi y / period) with a closed-form gradient.
AlgebraFn cosine(double amplitude, double period);

/// Registry lookup by name; throws ConfigError for unknown names.
AlgebraFn by_name(const std::string& name);
std::vector<std::string> names();

}  // namespace presets

/// Rebuilds a preset from its describe() record.
AlgebraFn from_record(const nlohmann::json& record);

}  // namespace homog
