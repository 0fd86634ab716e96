#include "mckv/contrast.hpp"

#include <cmath>
#include <numbers>

#include "mckv/errors.hpp"

namespace mckv {
namespace {

WeightFunction finalize(std::string name, double eps, std::function<double(double)> raw) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("weight: eps must lie in (0,1)");
  // fine reference quadrature for the normalization and the constants
  const int n = 200000;
  const double h = (1.0 - eps) / double(n);
  double mass = 0.0, c2 = 0.0, cinf = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = eps + h * double(i);
    const double tw = (i == 0 || i == n) ? 0.5 * h : h;
    const double v = raw(x);
    mass += v * tw;
    c2 += x * x * v * tw;
    cinf = std::max(cinf, x * x * v);
  }
  if (!(mass > 0.0)) throw NumericError("weight: zero mass on [eps, 1]");
  WeightFunction w;
  w.name = std::move(name);
  w.eps = eps;
  w.eval = [raw, eps, mass](double x) {
    if (x <= eps || x >= 1.0) return 0.0;
    return raw(x) / mass;
  };
  w.C2 = c2 / mass;
  w.C_inf = cinf / mass;
  return w;
}

}  // namespace

WeightFunction bump_weight(double eps) {
  return finalize("bump", eps, [eps](double x) {
    const double t = (x - eps) * (1.0 - x);
    return (t > 0.0) ? std::exp(-1.0 / t) : 0.0;
  });
}

WeightFunction quartic_weight(double eps) {
  return finalize("quartic", eps, [eps](double x) {
    const double u = x - eps, v = 1.0 - x;
    return (u > 0.0 && v > 0.0) ? u * u * v * v : 0.0;
  });
}

WeightFunction cosine_weight(double eps) {
  return finalize("cosine", eps, [eps](double x) {
    if (x <= eps || x >= 1.0) return 0.0;
    return 1.0 - std::cos(2.0 * std::numbers::pi * (x - eps) / (1.0 - eps));
  });
}

WeightFunction triangle_weight(double eps) {
  return finalize("triangle", eps, [eps](double x) {
    const double mid = 0.5 * (eps + 1.0), half = 0.5 * (1.0 - eps);
    const double t = 1.0 - std::abs(x - mid) / half;
    return (t > 0.0) ? t : 0.0;
  });
}

WeightFunction indicator_weight(double eps) {
  return finalize("indicator", eps, [eps](double x) {
    return (x > eps && x < 1.0) ? 1.0 : 0.0;
  });
}

double estimate_alpha(const GridFunction& l_est,
                      const std::function<double(double)>& tilde_v_prime,
                      const WeightFunction& w, double U) {
  if (!(U >= 1.0)) throw ConfigError("estimate_alpha: U must be >= 1");
  const Grid& g = l_est.grid;
  if (g.x_max < U - 0.5 * g.spacing() || g.x_min > w.eps * U)
    throw ConfigError("estimate_alpha: grid does not cover the weight support [eps U, U]");

  double num = 0.0, den = 0.0;
  const double dx = g.spacing();
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.point(i);
    const double wu = w.eval(x / U) / U;
    if (wu == 0.0) continue;
    const double tw = trapezoid_weight(i, g.n_points, dx);
    const double vt = tilde_v_prime ? tilde_v_prime(x) : 0.0;
    num += (l_est.values[i] + 2.0 * vt) * x * wu * tw;
    den += x * x * wu * tw;
  }
  if (!(den > 0.0))
    throw NumericError("estimate_alpha: weight support not resolved by the grid");
  return -0.5 * num / den;
}

GridFunction build_psi(const GridFunction& l_est, double alpha_hat,
                       const std::function<double(double)>& tilde_v_prime, double eps, double U,
                       const Grid& grid) {
  if (!(l_est.grid == grid)) throw ConfigError("build_psi: grid mismatch");
  const double window = eps * U;
  std::vector<double> psi(grid.n_points, 0.0);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double y = grid.point(i);
    if (std::abs(y) > window) continue;
    const double vt = tilde_v_prime ? tilde_v_prime(y) : 0.0;
    psi[i] = l_est.values[i] + 2.0 * alpha_hat * y + 2.0 * vt;
  }
  return GridFunction(grid, std::move(psi));
}

}  // namespace mckv
