#include "mckv/transform.hpp"

#include <cmath>
#include <numbers>

#include "mckv/errors.hpp"

namespace mckv {

std::vector<double> frequency_grid(double y_max, std::size_t n_freq) {
  if (!(y_max > 0.0) || n_freq < 2) throw ConfigError("frequency_grid: bad parameters");
  std::vector<double> y(n_freq);
  const double dy = 2.0 * y_max / double(n_freq - 1);
  for (std::size_t k = 0; k < n_freq; ++k) y[k] = -y_max + dy * double(k);
  return y;
}

namespace {

void check_uniform(std::span<const double> y) {
  if (y.size() < 2) throw ConfigError("line transform: need at least two frequencies");
  const double dy = y[1] - y[0];
  if (!(dy > 0.0)) throw ConfigError("line transform: y grid must be increasing");
  for (std::size_t k = 1; k < y.size(); ++k)
    if (std::abs((y[k] - y[k - 1]) - dy) > 1e-9 * dy)
      throw ConfigError("line transform: y grid must be uniform");
}

}  // namespace

LineTransform forward_line_transform(const GridFunction& f, double a,
                                     std::span<const double> y_grid) {
  check_uniform(y_grid);
  const Grid& g = f.grid;
  const double dx = g.spacing();

  // restrict to the support of f: the phase recurrence cost is per sample
  std::size_t j0 = 0, j1 = g.n_points;
  while (j0 < j1 && f.values[j0] == 0.0) ++j0;
  while (j1 > j0 && f.values[j1 - 1] == 0.0) --j1;

  LineTransform out;
  out.a = a;
  out.y_values.assign(y_grid.begin(), y_grid.end());
  out.values.assign(y_grid.size(), {0.0, 0.0});
  if (j0 == j1) return out;

  std::vector<double> damped(j1 - j0);
  for (std::size_t j = j0; j < j1; ++j) {
    const double x = g.point(j);
    if (std::abs(a * x) > 700.0)
      throw NumericError("forward_line_transform: |a x| > 700 on the support of f");
    damped[j - j0] = f.values[j] * std::exp(-a * x) * trapezoid_weight(j, g.n_points, dx);
  }
  const double x0 = g.point(j0);
  for (std::size_t k = 0; k < y_grid.size(); ++k) {
    const double y = y_grid[k];
    std::complex<double> phase = std::polar(1.0, y * x0);
    const std::complex<double> step = std::polar(1.0, y * dx);
    std::complex<double> s = 0.0;
    for (double dj : damped) {
      s += dj * phase;
      phase *= step;
    }
    out.values[k] = s;
  }
  return out;
}

LineTransform empirical_line_transform(const ParticleEnsemble& e, double a,
                                       std::span<const double> y_grid) {
  check_uniform(y_grid);
  LineTransform out;
  out.a = a;
  out.y_values.assign(y_grid.begin(), y_grid.end());
  out.values.assign(y_grid.size(), {0.0, 0.0});
  const double y0 = y_grid[0];
  const double dy = y_grid[1] - y_grid[0];
  for (double x : e.positions) {
    if (std::abs(a * x) > 700.0)
      throw NumericError("empirical_line_transform: |a X| > 700, exp overflow");
    const double damp = std::exp(-a * x);
    std::complex<double> phase = std::polar(damp, y0 * x);
    const std::complex<double> step = std::polar(1.0, dy * x);
    for (std::size_t k = 0; k < y_grid.size(); ++k) {
      out.values[k] += phase;
      phase *= step;
    }
  }
  const double inv_n = 1.0 / double(e.positions.size());
  for (auto& v : out.values) v *= inv_n;
  return out;
}

std::complex<double> density_char_fn(const GridDensity& d, std::complex<double> z) {
  const Grid& g = d.grid;
  const double dx = g.spacing();
  std::complex<double> s = 0.0;
  for (std::size_t j = 0; j < g.n_points; ++j) {
    const double x = g.point(j);
    if (std::abs(z.imag() * x) > 700.0)
      throw NumericError("density_char_fn: |Im(z) x| > 700");
    s += d.values[j] * std::exp(std::complex<double>(0.0, 1.0) * z * x) *
         trapezoid_weight(j, g.n_points, dx);
  }
  return s;
}

InverseTransformResult inverse_line_transform(const LineTransform& F, const Grid& x_grid) {
  if (F.y_values.size() < 2) throw ConfigError("inverse_line_transform: empty transform");
  const double dy = F.y_spacing();
  const std::size_t n_y = F.y_values.size();

  double peak = 0.0;
  for (const auto& v : F.values) peak = std::max(peak, std::abs(v));
  const double edge = std::max(std::abs(F.values.front()), std::abs(F.values.back()));

  std::vector<std::complex<double>> weighted(n_y);
  for (std::size_t k = 0; k < n_y; ++k)
    weighted[k] = F.values[k] * trapezoid_weight(k, n_y, dy);

  const double y0 = F.y_values[0];
  const double a = F.a;
  std::vector<double> re(x_grid.n_points), im(x_grid.n_points);
  for (std::size_t l = 0; l < x_grid.n_points; ++l) {
    const double x = x_grid.point(l);
    if (std::abs(a * x) > 700.0)
      throw NumericError("inverse_line_transform: |a x| > 700 on the target grid");
    std::complex<double> phase = std::polar(1.0, -y0 * x);
    const std::complex<double> step = std::polar(1.0, -dy * x);
    std::complex<double> s = 0.0;
    for (const auto& wk : weighted) {
      s += wk * phase;
      phase *= step;
    }
    s *= std::exp(a * x) / (2.0 * std::numbers::pi);
    re[l] = s.real();
    im[l] = s.imag();
  }

  InverseTransformResult res;
  res.tail_warning = peak > 0.0 && edge >= 1e-3 * peak;
  double re2 = 0.0, im2 = 0.0;
  for (std::size_t l = 0; l < x_grid.n_points; ++l) {
    re2 += re[l] * re[l];
    im2 += im[l] * im[l];
  }
  res.imag_residue_ratio = (re2 > 0.0) ? std::sqrt(im2 / re2) : 0.0;
  res.f = GridFunction(x_grid, std::move(re));
  return res;
}

}  // namespace mckv
