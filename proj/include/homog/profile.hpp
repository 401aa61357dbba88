#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace homog {

/// Which one-sided limit a profile takes at a jump.
enum class JumpSide { Left, Right };

struct Knot {
  double u = 0.0;
  double left = 0.0;   // limit from the left
  double right = 0.0;  // limit from the right; right > left marks a jump
  JumpSide side = JumpSide::Right;
};

/// Piecewise-linear nondecreasing function with linear extension outside
/// its knots. Flat pieces (plateaus) are only accepted when the profile is
/// flagged type-2 capable; jumps are stored as knots with left < right.
class MonotoneProfile {
 public:
  MonotoneProfile(std::vector<Knot> knots, double slope_below,
                  double slope_above, bool allow_plateaus = false);

  /// Continuous profile through (u[i], v[i]).
  static MonotoneProfile from_points(std::span<const double> u,
                                     std::span<const double> v,
                                     double slope_below, double slope_above,
                                     bool allow_plateaus = false);
  static MonotoneProfile linear(double slope);
  /// The Stefan enthalpy law: u + 1/2 below -1/2, 0 on [-1/2, 1/2],
  /// u - 1/2 above.
  static MonotoneProfile stefan();

  double operator()(double u) const;
  double left_limit(double u) const;
  double right_limit(double u) const;
  /// Derivative from the right.
  double right_slope(double u) const;
  /// Exact integral over [a, b].
  double integral(double a, double b) const;

  bool has_plateaus() const;
  bool has_jumps() const;
  double min_segment_slope() const;
  double max_segment_slope() const;

  const std::vector<Knot>& knots() const { return knots_; }
  double slope_below() const { return slope_below_; }
  double slope_above() const { return slope_above_; }
  bool allows_plateaus() const { return allow_plateaus_; }

  /// Rows "u,left,right,side".
  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  // Index of the last knot with knots_[i].u <= u, or -1.
  std::ptrdiff_t locate(double u) const;
  double antiderivative(double u) const;

  std::vector<Knot> knots_;
  double slope_below_;
  double slope_above_;
  bool allow_plateaus_;
  std::vector<double> cumulative_;  // integral from knots_[0].u to knots_[i].u
};

struct GeneralizedInverse {
  MonotoneProfile inverse;
  /// Values where the inverse jumps (images of the plateaus).
  std::vector<double> jumps;
};

/// Minimal inverse G(r) = min{u : P(u) = r}. Plateaus of P become jumps of
/// G (taking the left end) and jumps of P become plateaus of G.
GeneralizedInverse generalized_inverse(const MonotoneProfile& profile);

}  // namespace homog
