#include "mckv/kernels.hpp"

#include <cmath>
#include <numbers>

#include "mckv/errors.hpp"

namespace mckv {
namespace {

// Even polynomial factors P_m with K_m = P_m * phi killing moments up to
// m-1 against the standard Gaussian.
std::vector<double> kernel_poly(int m) {
  switch (m) {
    case 2: return {1.0};
    case 4: return {1.5, -0.5};
    case 6: return {15.0 / 8, -10.0 / 8, 1.0 / 8};
    case 8: return {105.0 / 48, -105.0 / 48, 21.0 / 48, -1.0 / 48};
    default: throw ConfigError("make_kernel: order must be one of {2, 4, 6, 8}");
  }
}

double eval_even_poly(const std::vector<double>& c, double x2) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x2 + c[k];
  return v;
}

}  // namespace

HighOrderKernel make_kernel(int m) {
  const auto coef = kernel_poly(m);
  // P'(x) as an even-power series times x
  std::vector<double> dcoef(coef.size() > 1 ? coef.size() - 1 : 1, 0.0);
  for (std::size_t k = 1; k < coef.size(); ++k) dcoef[k - 1] = coef[k] * 2.0 * double(k);
  const bool has_d = coef.size() > 1;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  HighOrderKernel k;
  k.order_m = m;
  k.eval = [coef, norm](double x) {
    return eval_even_poly(coef, x * x) * norm * std::exp(-0.5 * x * x);
  };
  k.deriv = [coef, dcoef, has_d, norm](double x) {
    const double x2 = x * x;
    const double p = eval_even_poly(coef, x2);
    const double dp = has_d ? x * eval_even_poly(dcoef, x2) : 0.0;
    return (dp - x * p) * norm * std::exp(-0.5 * x2);
  };
  double radius = 1.0;
  for (double x = 0.0; x <= 14.0; x += 0.01)
    if (std::abs(k.eval(x)) > 1e-15 * norm || std::abs(k.deriv(x)) > 1e-15 * norm)
      radius = x;
  k.support_radius = radius + 0.01;
  return k;
}

EstimatorConfig derive_config(const PotentialModel& pm, std::size_t N, double T, int m,
                              double eps, double a, std::optional<double> c1_hat) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("derive_config: eps must lie in (0,1)");
  if (N < 1) throw ConfigError("derive_config: N must be >= 1");
  kernel_poly(m);  // validates m
  if (pm.confinement.has_tilde() && pm.confinement.smoothness_J &&
      m > *pm.confinement.smoothness_J)
    throw ConfigError("derive_config: kernel order m exceeds confinement smoothness J");

  EstimatorConfig cfg;
  cfg.m = m;
  cfg.eps = eps;
  cfg.a = a;
  cfg.C_tilde = pm.confinement.C_tilde();
  cfg.C_V = pm.confinement.C_V;
  cfg.N_T = 1.0 / (1.0 / double(N) + std::exp(-pm.lambda * T));
  cfg.h0 = std::pow(cfg.N_T, -1.0 / (2.0 * double(m + 1)));
  cfg.h1 = std::pow(cfg.N_T, -1.0 / (2.0 * double(m + 2)));

  const double ratio = double(m) / (2.0 * double(m + 2));
  cfg.c_u = ratio / (cfg.C_tilde + cfg.C_V * eps * eps / 4.0);
  cfg.gamma = ratio / (1.0 + 4.0 * cfg.C_tilde / (eps * eps * cfg.C_V));

  const double log_nt = std::log(cfg.N_T);
  if (!(log_nt > 0.0)) throw ConfigError("derive_config: N_T <= 1, no usable sample size");
  cfg.U = std::sqrt(cfg.c_u * log_nt);
  if (cfg.U < 1.0)
    throw ConfigError("derive_config: window U < 1; N_T too small for the schedule");
  cfg.eps_NT = std::exp(0.5 * a * eps * std::sqrt(cfg.c_u * log_nt)) *
               std::pow(log_nt, 0.25) * std::pow(cfg.N_T, -0.5 * cfg.gamma);

  if (c1_hat) {
    cfg.c1_hat = *c1_hat;
    cfg.delta = 0.5 * cfg.c1_hat * std::exp(-cfg.C_tilde * cfg.U * cfg.U);
  } else {
    cfg.c1_hat = std::numeric_limits<double>::quiet_NaN();
    cfg.delta = std::numeric_limits<double>::quiet_NaN();
  }
  return cfg;
}

EstimatorConfig with_c1_hat(EstimatorConfig cfg, double c1_hat) {
  if (!(c1_hat > 0.0)) throw ConfigError("with_c1_hat: c1_hat must be positive");
  cfg.c1_hat = c1_hat;
  cfg.delta = 0.5 * c1_hat * std::exp(-cfg.C_tilde * cfg.U * cfg.U);
  return cfg;
}

namespace {

template <class Eval>
GridFunction kernel_sum(const ParticleEnsemble& e, const Eval& eval, double h, double weight,
                        double radius, const Grid& grid) {
  if (!(h > 0.0)) throw ConfigError("kernel estimate: bandwidth must be positive");
  std::vector<double> out(grid.n_points, 0.0);
  const double dx = grid.spacing();
  const double reach = radius * h;
  for (double xi : e.positions) {
    const double lo = xi - reach, hi = xi + reach;
    if (hi < grid.x_min || lo > grid.x_max) continue;
    const std::size_t j0 = (lo <= grid.x_min) ? 0 : grid.cell_index(lo);
    std::size_t j1 = (hi >= grid.x_max) ? grid.n_points - 1 : grid.cell_index(hi) + 1;
    for (std::size_t j = j0; j <= j1; ++j) out[j] += eval((grid.point(j) - xi) / h);
  }
  const double scale = weight / double(e.positions.size());
  for (double& v : out) v *= scale;
  return GridFunction(grid, std::move(out));
}

}  // namespace

GridFunction estimate_density(const ParticleEnsemble& e, const HighOrderKernel& k, double h0,
                              const Grid& grid) {
  return kernel_sum(e, k.eval, h0, 1.0 / h0, k.support_radius, grid);
}

GridFunction estimate_density_derivative(const ParticleEnsemble& e, const HighOrderKernel& k,
                                         double h1, const Grid& grid) {
  return kernel_sum(e, k.deriv, h1, 1.0 / (h1 * h1), k.support_radius, grid);
}

GridFunction log_density_derivative(const GridFunction& pi_est,
                                    const GridFunction& pi_prime_est, double delta) {
  if (!(delta > 0.0)) throw ConfigError("log_density_derivative: delta must be positive");
  if (!(pi_est.grid == pi_prime_est.grid))
    throw ConfigError("log_density_derivative: grid mismatch");
  std::vector<double> l(pi_est.values.size(), 0.0);
  for (std::size_t i = 0; i < l.size(); ++i)
    if (pi_est.values[i] > delta) l[i] = pi_prime_est.values[i] / pi_est.values[i];
  return GridFunction(pi_est.grid, std::move(l));
}

}  // namespace mckv
