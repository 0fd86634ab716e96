#include "mckv/density.hpp"

#include <algorithm>
#include <cmath>

#include "mckv/errors.hpp"

namespace mckv {

GridDensity GridDensity::from_values(Grid g, std::vector<double> raw) {
  if (raw.size() != g.n_points) throw ConfigError("GridDensity: values length mismatch");
  double peak = 0.0;
  for (double v : raw) peak = std::max(peak, v);
  if (!(peak > 0.0)) throw NumericError("GridDensity: no positive mass");
  for (double& v : raw) {
    if (v < 0.0) {
      if (v < -1e-6 * peak) throw NumericError("GridDensity: negative density values");
      v = 0.0;
    }
  }
  const double z = trapezoid(raw, g.spacing());
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericError("GridDensity: non-normalizable");
  for (double& v : raw) v /= z;
  GridDensity d;
  d.grid = g;
  d.values = std::move(raw);
  d.normalizer = z;
  return d;
}

GridDensity GridDensity::gaussian(Grid g, double mean, double variance) {
  if (!(variance > 0.0)) throw ConfigError("GridDensity::gaussian: variance must be positive");
  std::vector<double> v(g.n_points);
  const double inv2v = 0.5 / variance;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double d = g.point(i) - mean;
    v[i] = std::exp(-d * d * inv2v);
  }
  return from_values(g, std::move(v));
}

double GridDensity::operator()(double x) const {
  if (!grid.contains(x)) return 0.0;
  const std::size_t i = grid.cell_index(x);
  const double t = (x - grid.point(i)) / grid.spacing();
  return values[i] + t * (values[i + 1] - values[i]);
}

double GridDensity::mass() const { return trapezoid(values, grid.spacing()); }

std::vector<double> GridDensity::cdf() const {
  std::vector<double> c(values.size());
  c[0] = 0.0;
  const double dx = grid.spacing();
  for (std::size_t i = 1; i < values.size(); ++i)
    c[i] = c[i - 1] + 0.5 * dx * (values[i - 1] + values[i]);
  for (double& v : c) v = std::min(v, 1.0);
  c.back() = 1.0;
  return c;
}

double GridDensity::quantile(double u) const {
  const auto c = cdf();
  u = std::clamp(u, 0.0, 1.0);
  auto it = std::lower_bound(c.begin(), c.end(), u);
  if (it == c.begin()) return grid.x_min;
  if (it == c.end()) return grid.x_max;
  const std::size_t i = std::size_t(it - c.begin());
  const double c0 = c[i - 1], c1 = c[i];
  const double t = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
  return grid.point(i - 1) + t * grid.spacing();
}

const GridDensity& DensityFlow::at_time(double t, double tol) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= tol) return densities[i];
  throw ConfigError("DensityFlow: no snapshot at requested time");
}

bool DensityFlow::covers(double T, double dt, double tol) const {
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  std::size_t k = 0;
  for (std::size_t s = 0; s <= steps; ++s) {
    const double t = double(s) * dt;
    while (k < times.size() && times[k] < t - tol) ++k;
    if (k >= times.size() || std::abs(times[k] - t) > tol) return false;
  }
  return true;
}

}  // namespace mckv
