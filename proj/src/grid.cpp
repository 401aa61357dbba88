#include "homog/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homog {

Grid1D::Grid1D(double a_, double b_, std::size_t N_) : a(a_), b(b_), N(N_) {
  if (N < 8) throw std::invalid_argument("Grid1D: need at least 8 cells");
  if (!(b > a)) throw std::invalid_argument("Grid1D: empty interval");
}

std::vector<double> Grid1D::centers() const {
  std::vector<double> xs(N);
  for (std::size_t i = 0; i < N; ++i) xs[i] = x(i);
  return xs;
}

std::vector<double> Grid1D::eigen_weight() const {
  std::vector<double> w(N);
  for (std::size_t i = 0; i < N; ++i) w[i] = std::sin(std::numbers::pi * (x(i) - a) / (b - a));
  return w;
}

double Grid1D::eigenvalue() const {
  const double k = std::numbers::pi / (b - a);
  return k * k;
}

Field::Field(Grid1D g, std::vector<double> v, Role r)
    : grid(g), values(std::move(v)), role(r) {
  if (values.size() != grid.N) throw std::invalid_argument("Field: size does not match grid");
  for (double x : values)
    if (!std::isfinite(x)) throw std::invalid_argument("Field: non-finite value");
}

Field Field::zeros(const Grid1D& g, Role r) {
  return Field(g, std::vector<double>(g.N, 0.0), r);
}

}  // namespace homog
