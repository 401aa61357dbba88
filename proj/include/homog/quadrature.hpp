#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace homog::quad {

struct Options {
  /// Absolute tolerance on the integral (not the mean).
  double abs_tol = 1e-11;
  /// Subinterval budget of the global adaptive scheme.
  std::size_t max_intervals = 20000;
  /// Number of equal pieces the interval starts from. Narrow features of
  /// width w are only seen reliably when (b - a) / initial_pieces < w.
  std::size_t initial_pieces = 1;
  /// Grid used to bracket the zeros of switch functions.
  std::size_t switch_samples = 1024;
};

/// A function whose sign changes mark the only places where an integrand
/// may jump.
using Switch = std::function<double(double)>;
using BoxSwitch = std::function<double(std::span<const double>)>;

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

/// Sum in a fixed binary-tree order; the result depends only on the order
/// of the input, never on how the work was partitioned.
double pairwise_sum(std::span<const double> values);

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
/// The subinterval with the largest error estimate is bisected until the
/// total estimate drops below opts.abs_tol. Integrands with isolated jumps
/// are handled by bisection around the jump. Throws NonConvergedQuadrature
/// when the budget is exhausted.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

/// Sorted zeros of the switches in (a, b). Zeros are bracketed on a grid of
/// `samples` cells; a cell whose end values are small compared with the local
/// variation is bisected further, so tangential zeros are found as well.
std::vector<double> switch_points(std::span<const Switch> switches, double a,
                                  double b, std::size_t samples);

/// integrate() on each piece between consecutive switch points.
Result integrate_piecewise(const std::function<double(double)>& f, double a,
                           double b, std::span<const Switch> switches,
                           const Options& opts = {});

/// Iterated adaptive integration over the box [lo, hi] (any dimension).
/// Inner integrals receive a tolerance scaled by the outer box measure.
/// The innermost axis is split at the zeros of `switches`.
Result integrate_box(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> lo, std::span<const double> hi,
                     const Options& opts = {},
                     std::span<const BoxSwitch> switches = {});

/// Composite midpoint rule with n cells on [a, b].
double midpoint(const std::function<double(double)>& f, double a, double b,
                std::size_t n);

}  // namespace homog::quad
