#include "mckv/deconvolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mckv/errors.hpp"
#include "mckv/invariant.hpp"

namespace mckv {
namespace {

void check_same_line(const LineTransform& a, const LineTransform& b) {
  if (a.a != b.a || a.y_values.size() != b.y_values.size() ||
      a.y_values.front() != b.y_values.front() || a.y_values.back() != b.y_values.back())
    throw ConfigError("regularized_divide: transforms live on different lines/grids");
}

}  // namespace

DivideResult regularized_divide(const LineTransform& F_psi, const LineTransform& F_den,
                                const std::optional<LineTransform>& F_pi_oracle, double eps_NT,
                                RegMode mode) {
  check_same_line(F_psi, F_den);
  if (mode == RegMode::oracle_shift) {
    if (!F_pi_oracle) throw ConfigError("regularized_divide: oracle_shift needs F(pi_oracle)");
    check_same_line(F_psi, *F_pi_oracle);
  }
  if (!(eps_NT > 0.0)) throw ConfigError("regularized_divide: eps_NT must be positive");

  DivideResult out;
  out.ratio.a = F_psi.a;
  out.ratio.y_values = F_psi.y_values;
  out.ratio.values.resize(F_psi.values.size());
  out.min_denominator = std::numeric_limits<double>::infinity();

  const double lift = eps_NT * (1.0 + 0x1.0p-50);
  for (std::size_t k = 0; k < F_psi.values.size(); ++k) {
    std::complex<double> den;
    if (mode == RegMode::oracle_shift) {
      den = F_pi_oracle->values[k] + eps_NT;
    } else {
      den = F_den.values[k];
    }
    double mod = std::abs(den);
    if (mod < eps_NT) {
      den = (mod == 0.0) ? std::complex<double>(lift, 0.0) : den * (lift / mod);
      mod = std::abs(den);
      ++out.clipped_count;
    }
    out.min_denominator = std::min(out.min_denominator, mod);
    out.ratio.values[k] = -F_psi.values[k] / den;
  }
  return out;
}

EstimationResult estimate_interaction(const ParticleEnsemble& e, const PotentialModel& pm,
                                      EstimatorConfig cfg, const DeconvolutionSettings& s,
                                      const Grid& x_grid, const WeightFunction& weight,
                                      const std::optional<GridDensity>& pi_oracle) {
  EstimationResult res;
  const auto kernel = make_kernel(cfg.m);

  // Step 1: kernel estimates of pi, pi' and the thresholded log-derivative.
  res.pi_est = estimate_density(e, kernel, cfg.h0, x_grid);
  const auto pi_prime_est = estimate_density_derivative(e, kernel, cfg.h1, x_grid);

  if (std::isnan(cfg.delta)) {
    double c1 = 0.0;
    if (s.mode == RegMode::oracle_shift) {
      if (!pi_oracle)
        throw ConfigError("estimate_interaction: oracle_shift needs the invariant density");
      c1 = check_gaussian_sandwich(pm, *pi_oracle, 4.0).c1;
    } else {
      double peak = 0.0;
      for (double v : res.pi_est.values) peak = std::max(peak, v);
      c1 = 0.1 * peak;
    }
    cfg = with_c1_hat(cfg, c1);
  }
  res.l_est = log_density_derivative(res.pi_est, pi_prime_est, cfg.delta);

  // Step 2: contrast estimate of alpha; step 3: the Psi window.
  const auto& conf = pm.confinement;
  std::function<double(double)> vt_prime;
  if (conf.has_tilde())
    vt_prime = [&conf](double x) { return conf.tilde_v_deriv(x, 1); };
  res.alpha_hat = estimate_alpha(res.l_est, vt_prime, weight, cfg.U);
  if (cfg.eps * cfg.U > x_grid.x_max) {
    std::ostringstream os;
    os << "psi window eps*U = " << cfg.eps * cfg.U << " clipped to the grid edge "
       << x_grid.x_max;
    res.warnings.push_back(os.str());
  }
  res.psi = build_psi(res.l_est, res.alpha_hat, vt_prime, cfg.eps, cfg.U, x_grid);

  // Step 4: transforms, regularized division, inverse transform.
  const double eps_nt = (s.eps_NT > 0.0) ? s.eps_NT : cfg.eps_NT;
  const auto y = frequency_grid(s.y_max, s.n_freq);
  const auto F_psi = forward_line_transform(res.psi, s.a, y);
  const auto F_den = empirical_line_transform(e, s.a, y);
  std::optional<LineTransform> F_pi;
  if (s.mode == RegMode::oracle_shift) {
    if (!pi_oracle)
      throw ConfigError("estimate_interaction: oracle_shift needs the invariant density");
    F_pi = forward_line_transform(pi_oracle->as_function(), s.a, y);
  }
  auto divided = regularized_divide(F_psi, F_den, F_pi, eps_nt, s.mode);
  res.min_denominator = divided.min_denominator;
  res.clipped_frequencies = divided.clipped_count;

  auto inv = inverse_line_transform(divided.ratio, x_grid);
  res.w_prime = std::move(inv.f);
  res.imag_residue_ratio = inv.imag_residue_ratio;
  res.tail_warning = inv.tail_warning;
  if (inv.tail_warning)
    res.warnings.push_back("transform not decayed at y_max; inverse integral truncated early");

  res.config = cfg;
  res.config.eps_NT = eps_nt;
  return res;
}

FtsReport fts_diagnostic(const std::function<double(double)>& w_prime_true,
                         const GridDensity& pi, double a, double y_max, double fit_lo,
                         double fit_hi) {
  FtsReport rep;
  const Grid& g = pi.grid;
  const auto w_prime = GridFunction::sample(g, w_prime_true);
  const GridFunction pi_fn = pi.as_function();

  const double span = std::max(2.0 * y_max, fit_hi);
  const auto n_freq = std::size_t(std::lround(span / 0.01)) * 2 + 1;
  const auto y = frequency_grid(span, n_freq);

  const std::vector<double> lines =
      (a == 0.0) ? std::vector<double>{0.0} : std::vector<double>{a, -a};
  double g_half = 0.0, g_full = 0.0;
  bool first_line = true;
  for (double line : lines) {
    const auto Fw = forward_line_transform(w_prime, line, y);
    const auto Fp = forward_line_transform(pi_fn, line, y);
    const double dy = Fw.y_spacing();
    // quadrature noise floor: where both transforms are numerically dead the
    // ratio is noise over noise and carries no decay information
    const double floor = 1e-13;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double fp = std::abs(Fp.values[k]);
      const double fw = std::abs(Fw.values[k]);
      const double ratio2 =
          (fp < floor && fw < floor) ? 0.0 : (fw * fw) / std::max(fp * fp, floor * floor);
      const double tw = trapezoid_weight(k, y.size(), dy);
      if (std::abs(y[k]) <= y_max) g_half += ratio2 * tw;
      if (std::abs(y[k]) <= 2.0 * y_max) g_full += ratio2 * tw;
      if (first_line) {
        if (k == 0 || fp < rep.min_abs_f_pi) {
          rep.min_abs_f_pi = fp;
          rep.min_abs_location = y[k];
        }
      }
    }
    // the zero scan and decay fit are properties of F(pi) on the first line
    if (first_line) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
      std::vector<std::pair<double, double>> pts;
      for (std::size_t k = 0; k < y.size(); ++k) {
        if (y[k] < fit_lo || y[k] > fit_hi) continue;
        const double fp = std::abs(Fp.values[k]);
        if (fp < 1e-13) continue;
        pts.emplace_back(std::log(y[k]), std::log(fp));
      }
      for (auto [lx, ly] : pts) {
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        n += 1.0;
      }
      if (n >= 2.0) {
        const double denom = n * sxx - sx * sx;
        rep.decay_slope = (n * sxy - sx * sy) / denom;
        const double intercept = (sy - rep.decay_slope * sx) / n;
        double ssr = 0.0;
        for (auto [lx, ly] : pts) {
          const double r = ly - (intercept + rep.decay_slope * lx);
          ssr += r * r;
        }
        rep.decay_slope_stderr =
            (n > 2.0) ? std::sqrt(ssr / (n - 2.0) / (sxx - sx * sx / n)) : 0.0;
      }
      first_line = false;
    }
  }
  rep.integral_at_y_max = g_half;
  rep.integral_at_2y_max = g_full;
  rep.growth_ratio = (g_half > 0.0) ? (g_full - g_half) / g_half : 0.0;
  rep.integral_converged = rep.growth_ratio < 0.1;
  rep.pass = rep.integral_converged;
  return rep;
}

}  // namespace mckv
