#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace homog {

/// Uniform cell-centred grid on [a, b].
struct Grid1D {
  double a = 0.0;
  double b = 1.0;
  std::size_t N = 8;

  Grid1D() = default;
  Grid1D(double a, double b, std::size_t N);

  double dx() const { return (b - a) / static_cast<double>(N); }
  double x(std::size_t i) const { return a + (static_cast<double>(i) + 0.5) * dx(); }
  std::vector<double> centers() const;
  /// First Dirichlet eigenfunction sin(pi (x - a) / (b - a)) at the centres.
  std::vector<double> eigen_weight() const;
  /// Its eigenvalue (pi / (b - a))^2.
  double eigenvalue() const;

  bool operator==(const Grid1D& o) const { return a == o.a && b == o.b && N == o.N; }
};

enum class Role { Density, Pressure };

struct Field {
  Grid1D grid;
  std::vector<double> values;
  Role role = Role::Density;

  Field() = default;
  Field(Grid1D g, std::vector<double> v, Role r = Role::Density);
  static Field zeros(const Grid1D& g, Role r = Role::Density);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

struct CauchyRecord {
  std::vector<double> sigmas;
  std::vector<double> distances;  // between consecutive sigma levels at t = T
  std::vector<double> ratios;     // distances[k] / distances[k + 1]
  double required_ratio = 0.0;
  bool passed = true;
};

/// Stored time levels of one solve.
struct Trajectory {
  Grid1D grid;
  std::vector<double> times;
  std::vector<std::vector<double>> u;
  double dt = 0.0;
  double sigma = 0.0;
  std::string flux_id;
  std::vector<int> newton_iterations;  // per step
  std::vector<double> residuals;       // final residual per step
  CauchyRecord cauchy;

  std::size_t levels() const { return times.size(); }
  Field field(std::size_t n) const { return Field(grid, u[n]); }
  const std::vector<double>& final() const { return u.back(); }
};

}  // namespace homog
