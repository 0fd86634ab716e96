#include "mckv/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mckv/errors.hpp"

namespace mckv {
namespace {

// Integral of |d(x)| over [u, v] where d is linear with endpoint values e, g.
double abs_linear_integral(double u, double v, double e, double g) {
  const double len = v - u;
  if (len <= 0.0) return 0.0;
  if (e * g >= 0.0) return 0.5 * (std::abs(e) + std::abs(g)) * len;
  return 0.5 * (e * e + g * g) / std::abs(e - g) * len;
}

// CDF evaluated with linear interpolation between the density's grid nodes,
// 0 to the left of the grid and 1 to the right.
struct DensityCdf {
  const GridDensity* d;
  std::vector<double> node_cdf;

  explicit DensityCdf(const GridDensity& density) : d(&density), node_cdf(density.cdf()) {}

  double operator()(double x) const {
    if (x <= d->grid.x_min) return 0.0;
    if (x >= d->grid.x_max) return 1.0;
    const std::size_t i = d->grid.cell_index(x);
    const double t = (x - d->grid.point(i)) / d->grid.spacing();
    return node_cdf[i] + t * (node_cdf[i + 1] - node_cdf[i]);
  }
};

double step_cdf(const std::vector<double>& sorted, double x) {
  return double(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
         double(sorted.size());
}

// \int |F - G| dx over the union of breakpoints, where both F and G are
// linear (or constant) between consecutive breakpoints.
template <class F1, class F2>
double cdf_l1(const std::vector<double>& breaks, F1&& F, F2&& G) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double u = breaks[k], v = breaks[k + 1];
    if (!(v > u)) continue;
    // nudge inward so step functions are sampled strictly inside the cell
    const double eps = 0.0;
    const double e = F(u + eps) - G(u + eps);
    const double g = F(v - eps) - G(v - eps);
    total += abs_linear_integral(u, v, e, g);
  }
  return total;
}

}  // namespace

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("wasserstein1: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa.size() == sb.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) s += std::abs(sa[i] - sb[i]);
    return s / double(sa.size());
  }
  // unequal sizes: L1 distance between the piecewise-constant quantile
  // functions over the union of the jump locations i/n and j/m
  const std::size_t n = sa.size(), m = sb.size();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  double u = 0.0;
  while (i < n && j < m) {
    const double ui = double(i + 1) / double(n);
    const double uj = double(j + 1) / double(m);
    const double next = std::min(ui, uj);
    s += (next - u) * std::abs(sa[i] - sb[j]);
    u = next;
    if (ui <= next + 1e-15) ++i;
    if (uj <= next + 1e-15) ++j;
  }
  return s;
}

double wasserstein1(std::span<const double> sample, const GridDensity& density) {
  if (sample.empty()) throw ConfigError("wasserstein1: empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());

  std::vector<double> breaks;
  breaks.reserve(s.size() + density.grid.n_points + 2);
  breaks.push_back(std::min(s.front(), density.grid.x_min));
  for (std::size_t i = 0; i < density.grid.n_points; ++i) breaks.push_back(density.grid.point(i));
  breaks.insert(breaks.end(), s.begin(), s.end());
  breaks.push_back(std::max(s.back(), density.grid.x_max));
  std::sort(breaks.begin(), breaks.end());

  DensityCdf dc(density);
  // evaluate the step CDF at cell midpoints so jumps at breakpoints are safe
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double u = breaks[k], v = breaks[k + 1];
    if (!(v > u)) continue;
    const double c = step_cdf(s, 0.5 * (u + v));
    total += abs_linear_integral(u, v, c - dc(u), c - dc(v));
  }
  return total;
}

double wasserstein1(const GridDensity& a, const GridDensity& b) {
  std::vector<double> breaks;
  for (std::size_t i = 0; i < a.grid.n_points; ++i) breaks.push_back(a.grid.point(i));
  for (std::size_t i = 0; i < b.grid.n_points; ++i) breaks.push_back(b.grid.point(i));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  DensityCdf ca(a), cb(b);
  return cdf_l1(breaks, ca, cb);
}

}  // namespace mckv
