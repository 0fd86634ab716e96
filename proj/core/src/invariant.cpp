#include "mckv/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mckv/errors.hpp"

namespace mckv {

std::vector<double> kernel_difference_table(const std::function<double(double)>& kernel,
                                            const Grid& g) {
  const std::size_t n = g.n_points;
  const double dx = g.spacing();
  std::vector<double> table(2 * n - 1);
  for (std::size_t k = 0; k < table.size(); ++k)
    table[k] = kernel((double(k) - double(n - 1)) * dx);
  return table;
}

std::vector<double> convolve_table(std::span<const double> table, std::span<const double> f,
                                   double dx) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  // Fold the trapezoid endpoint halving into f and reverse it so the inner
  // loop is a unit-stride dot product: sum_j table[i + j] * f[n-1-j].
  std::vector<double> fr(n);
  for (std::size_t j = 0; j < n; ++j) fr[j] = f[n - 1 - j];
  fr.front() *= 0.5;
  fr.back() *= 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    const double* trow = table.data() + i;
    // independent partial sums so the loop runs at FMA throughput instead of
    // serializing on one accumulator
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    double s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      s0 += trow[j] * fr[j];
      s1 += trow[j + 1] * fr[j + 1];
      s2 += trow[j + 2] * fr[j + 2];
      s3 += trow[j + 3] * fr[j + 3];
      s4 += trow[j + 4] * fr[j + 4];
      s5 += trow[j + 5] * fr[j + 5];
      s6 += trow[j + 6] * fr[j + 6];
      s7 += trow[j + 7] * fr[j + 7];
    }
    for (; j < n; ++j) s0 += trow[j] * fr[j];
    out[i] = (((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7))) * dx;
  }
  return out;
}

// Wide enough that exp(-2V) < 1e-14 at the endpoints for every built-in
// default (alpha >= 0.5): half-width 8 only gives 1.27e-14 at alpha = 0.5.
Grid default_invariant_grid() { return Grid(-8.5, 8.5, 4097); }

namespace {

// exp(-2V - W * pi) normalized; also reports the pre-normalization integral.
std::vector<double> picard_step(const PotentialModel& pm, const Grid& g,
                                const std::vector<double>& exp_m2v,
                                std::span<const double> w_table,
                                const std::vector<double>& pi, double& z_out) {
  const std::size_t n = g.n_points;
  std::vector<double> out(n);
  if (pm.interaction.kind == PairKind::zero) {
    out = exp_m2v;
  } else {
    const auto conv = convolve_table(w_table, pi, g.spacing());
    for (std::size_t i = 0; i < n; ++i) out[i] = exp_m2v[i] * std::exp(-conv[i]);
  }
  z_out = trapezoid(out, g.spacing());
  if (!(z_out > 0.0) || !std::isfinite(z_out))
    throw NumericError("solve_invariant: degenerate normalizing constant");
  for (double& v : out) v /= z_out;
  return out;
}

}  // namespace

GridDensity solve_invariant(const PotentialModel& pm, const Grid& grid, double tol,
                            int max_iter, double damping) {
  if (!(tol > 0.0)) throw ConfigError("solve_invariant: tol must be positive");
  if (!(damping > 0.0 && damping <= 1.0))
    throw ConfigError("solve_invariant: damping must lie in (0, 1]");
  const std::size_t n = grid.n_points;
  std::vector<double> exp_m2v(n);
  for (std::size_t i = 0; i < n; ++i)
    exp_m2v[i] = std::exp(-2.0 * confinement_eval(pm.confinement, grid.point(i), 0));
  if (exp_m2v.front() > 1e-14 || exp_m2v.back() > 1e-14)
    throw ConfigError("solve_invariant: grid too narrow, exp(-2V) > 1e-14 at an endpoint");

  std::vector<double> w_table;
  if (pm.interaction.kind != PairKind::zero)
    w_table = kernel_difference_table(pm.interaction.w, grid);

  double z = trapezoid(exp_m2v, grid.spacing());
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = exp_m2v[i] / z;

  double res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const auto target = picard_step(pm, grid, exp_m2v, w_table, pi, z);
    res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(target[i] - pi[i]));
    for (std::size_t i = 0; i < n; ++i)
      pi[i] = (1.0 - damping) * pi[i] + damping * target[i];
    if (res <= tol) {
      auto d = GridDensity::from_values(grid, std::move(pi));
      d.normalizer = z;
      return d;
    }
  }
  std::ostringstream os;
  os << "solve_invariant: no convergence after " << max_iter
     << " iterations, last residual = " << res;
  throw NumericError(os.str());
}

double residual(const PotentialModel& pm, const GridDensity& pi) {
  const Grid& g = pi.grid;
  std::vector<double> exp_m2v(g.n_points);
  for (std::size_t i = 0; i < g.n_points; ++i)
    exp_m2v[i] = std::exp(-2.0 * confinement_eval(pm.confinement, g.point(i), 0));
  std::vector<double> w_table;
  if (pm.interaction.kind != PairKind::zero)
    w_table = kernel_difference_table(pm.interaction.w, g);
  double z = 0.0;
  const auto target = picard_step(pm, g, exp_m2v, w_table, pi.values, z);
  double res = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i)
    res = std::max(res, std::abs(target[i] - pi.values[i]));
  return res;
}

namespace {

std::vector<double> log_derivative_values(const PotentialModel& pm, const GridDensity& pi) {
  const Grid& g = pi.grid;
  std::vector<double> l(g.n_points);
  std::vector<double> conv(g.n_points, 0.0);
  if (pm.interaction.kind != PairKind::zero) {
    const auto table = kernel_difference_table(pm.interaction.w_prime, g);
    conv = convolve_table(table, pi.values, g.spacing());
  }
  for (std::size_t i = 0; i < g.n_points; ++i)
    l[i] = -2.0 * confinement_eval(pm.confinement, g.point(i), 1) - conv[i];
  return l;
}

}  // namespace

double exact_log_derivative(const PotentialModel& pm, GridDensity& pi, double x) {
  if (!pi.grid.contains(x)) throw ConfigError("exact_log_derivative: x outside grid");
  if (!pi.derivative_values) {
    const auto l = log_derivative_values(pm, pi);
    std::vector<double> dpi(pi.values.size());
    for (std::size_t i = 0; i < dpi.size(); ++i) dpi[i] = l[i] * pi.values[i];
    pi.derivative_values = std::move(dpi);
  }
  double conv = 0.0;
  if (pm.interaction.kind != PairKind::zero) {
    const double dx = pi.grid.spacing();
    for (std::size_t j = 0; j < pi.grid.n_points; ++j)
      conv += pm.interaction.w_prime(x - pi.grid.point(j)) * pi.values[j] *
              trapezoid_weight(j, pi.grid.n_points, dx);
  }
  return -2.0 * confinement_eval(pm.confinement, x, 1) - conv;
}

GridFunction exact_log_derivative_grid(const PotentialModel& pm, GridDensity& pi) {
  auto l = log_derivative_values(pm, pi);
  if (!pi.derivative_values) {
    std::vector<double> dpi(pi.values.size());
    for (std::size_t i = 0; i < dpi.size(); ++i) dpi[i] = l[i] * pi.values[i];
    pi.derivative_values = std::move(dpi);
  }
  return GridFunction(pi.grid, std::move(l));
}

SandwichFit check_gaussian_sandwich(const PotentialModel& pm, const GridDensity& pi,
                                    double x_range) {
  const double c_lo = pm.confinement.C_tilde();
  const double c_hi = pm.confinement.C_V;
  SandwichFit fit;
  fit.c1 = std::numeric_limits<double>::infinity();
  fit.c2 = 0.0;
  for (std::size_t i = 0; i < pi.grid.n_points; ++i) {
    const double x = pi.grid.point(i);
    if (std::abs(x) > x_range) continue;
    fit.c1 = std::min(fit.c1, pi.values[i] / std::exp(-c_lo * x * x));
    fit.c2 = std::max(fit.c2, pi.values[i] / std::exp(-c_hi * x * x));
  }
  double c2_global = 0.0;
  for (std::size_t i = 0; i < pi.grid.n_points; ++i) {
    const double x = pi.grid.point(i);
    c2_global = std::max(c2_global, pi.values[i] / std::exp(-c_hi * x * x));
  }
  fit.pass = fit.c1 > 0.0 && std::isfinite(fit.c1) && std::isfinite(fit.c2) &&
             fit.c2 > 0.0 && c2_global <= 10.0 * fit.c2;
  return fit;
}

DensityFlow fokker_planck_evolve(const PotentialModel& pm, const GridDensity& mu0, double T,
                                 double dt, double store_dt) {
  const Grid& g = mu0.grid;
  const double dx = g.spacing();
  if (!(dt > 0.0)) throw ConfigError("fokker_planck_evolve: dt must be positive");
  if (dt > 0.4 * dx * dx * (1.0 + 1e-12))
    throw ConfigError("fokker_planck_evolve: dt exceeds the stability bound 0.4 dx^2");
  if (T < 0.0) throw ConfigError("fokker_planck_evolve: negative horizon");

  const std::size_t n = g.n_points;
  if (store_dt <= 0.0) store_dt = (T > 0.0) ? T : dt;
  const auto segments = std::size_t(std::llround(T / store_dt));
  if (std::abs(double(segments) * store_dt - T) > 1e-9 * std::max(1.0, T))
    throw ConfigError("fokker_planck_evolve: T must be a multiple of store_dt");
  const int substeps = std::max(1, int(std::ceil(store_dt / dt - 1e-12)));
  const double h = store_dt / double(substeps);

  std::vector<double> vprime_mid(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    vprime_mid[i] = confinement_eval(pm.confinement, g.point(i) + 0.5 * dx, 1);

  std::vector<double> w_table;
  const bool interacting = pm.interaction.kind != PairKind::zero;
  if (interacting) w_table = kernel_difference_table(pm.interaction.w_prime, g);

  DensityFlow flow;
  flow.times.reserve(segments + 1);
  flow.densities.reserve(segments + 1);
  flow.times.push_back(0.0);
  flow.densities.push_back(mu0);

  std::vector<double> mu = mu0.values;
  std::vector<double> flux(n - 1);
  const double mass0 = trapezoid(mu, dx);

  for (std::size_t seg = 1; seg <= segments; ++seg) {
    for (int s = 0; s < substeps; ++s) {
      std::vector<double> conv;
      if (interacting) conv = convolve_table(w_table, mu, dx);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        double b = vprime_mid[i];
        if (interacting) b += 0.25 * (conv[i] + conv[i + 1]);
        const double v = -b;  // advection velocity of the density
        const double peclet = 2.0 * std::abs(v) * dx;
        double adv;
        if (peclet <= 1.9) {
          adv = v * 0.5 * (mu[i] + mu[i + 1]);
        } else {
          adv = v * (v > 0.0 ? mu[i] : mu[i + 1]);
        }
        flux[i] = adv - 0.5 * (mu[i + 1] - mu[i]) / dx;
      }
      const double c = h / dx;
      mu[0] += c * (-flux[0]);
      for (std::size_t i = 1; i + 1 < n; ++i) mu[i] += c * (flux[i - 1] - flux[i]);
      mu[n - 1] += c * flux[n - 2];
    }
    double neg = 0.0, peak = 0.0;
    for (double v : mu) {
      if (v < neg) neg = v;
      if (v > peak) peak = v;
    }
    if (!std::isfinite(peak) || peak > 1e6) {
      std::ostringstream os;
      os << "fokker_planck_evolve: blow-up detected at t = " << double(seg) * store_dt
         << "; reduce the step size";
      throw NumericError(os.str());
    }
    const double mass = trapezoid(mu, dx);
    if (-neg > 1e-3 || std::abs(mass - mass0) > 1e-6 * std::max(1.0, double(seg) * store_dt)) {
      std::ostringstream os;
      os << "fokker_planck_evolve: instability at t = " << double(seg) * store_dt
         << " (negative mass " << -neg << ", mass drift " << mass - mass0 << ")";
      throw NumericError(os.str());
    }
    flow.times.push_back(double(seg) * store_dt);
    flow.densities.push_back(GridDensity::from_values(g, mu));
  }
  return flow;
}

}  // namespace mckv
