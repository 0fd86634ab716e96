#include "mckv/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mckv/errors.hpp"

namespace mckv {

Grid::Grid(double lo, double hi, std::size_t n) : x_min(lo), x_max(hi), n_points(n) {
  if (n < 2 || !(hi > lo)) throw ConfigError("Grid: need x_max > x_min and n_points >= 2");
}

std::vector<double> Grid::points() const {
  std::vector<double> xs(n_points);
  for (std::size_t i = 0; i < n_points; ++i) xs[i] = point(i);
  return xs;
}

std::size_t Grid::cell_index(double x) const {
  const double t = (x - x_min) / spacing();
  auto i = static_cast<std::ptrdiff_t>(std::floor(t));
  i = std::clamp<std::ptrdiff_t>(i, 0, std::ptrdiff_t(n_points) - 2);
  return std::size_t(i);
}

GridFunction::GridFunction(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.n_points)
    throw ConfigError("GridFunction: values length does not match grid");
}

GridFunction GridFunction::sample(const Grid& g, const std::function<double(double)>& f) {
  std::vector<double> v(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i) v[i] = f(g.point(i));
  return GridFunction(g, std::move(v));
}

double GridFunction::operator()(double x) const {
  if (x <= grid.x_min) return values.front();
  if (x >= grid.x_max) return values.back();
  const std::size_t i = grid.cell_index(x);
  const double t = (x - grid.point(i)) / grid.spacing();
  return values[i] + t * (values[i + 1] - values[i]);
}

double GridFunction::integral() const { return trapezoid(values, grid.spacing()); }

double GridFunction::l2_norm() const {
  const double dx = grid.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    s += values[i] * values[i] * trapezoid_weight(i, values.size(), dx);
  return std::sqrt(s);
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double trapezoid(std::span<const double> values, double dx) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * dx;
}

double trapezoid_weight(std::size_t i, std::size_t n, double dx) {
  return (i == 0 || i + 1 == n) ? 0.5 * dx : dx;
}

double l2_distance(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid == b.grid)) throw ConfigError("l2_distance: grid mismatch");
  const double dx = a.grid.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d * trapezoid_weight(i, a.values.size(), dx);
  }
  return std::sqrt(s);
}

}  // namespace mckv
