#include "mckv/particle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mckv/errors.hpp"
#include "mckv/invariant.hpp"
#include "mckv/rng.hpp"

namespace mckv {

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::size_t validated_steps(double T, double dt) {
  if (!(dt > 0.0)) throw ConfigError("simulate: dt must be positive");
  if (T < 0.0) throw ConfigError("simulate: negative horizon");
  const auto steps = std::llround(T / dt);
  if (std::abs(double(steps) * dt - T) > 1e-9 * std::max(1.0, T))
    throw ConfigError("simulate: T must be a multiple of dt");
  return std::size_t(steps);
}

void check_model_and_step(const PotentialModel& pm, double dt) {
  if (!(pm.lambda > 0.0)) throw ConfigError("simulate: model has lambda <= 0");
  const double bound = 0.1 / std::max(pm.confinement.alpha + pm.interaction.C_W, 1.0);
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "simulate: dt = " << dt << " exceeds the stability bound " << bound;
    throw ConfigError(os.str());
  }
}

std::vector<double> draw_initial(std::size_t N, std::uint64_t seed, const InitSpec& init) {
  std::vector<double> x(N);
  for (std::size_t i = 0; i < N; ++i) {
    const auto rng = CounterRng::stream(seed, i).substream(1);
    switch (init.kind) {
      case InitSpec::Kind::point: x[i] = init.x0; break;
      case InitSpec::Kind::gaussian: x[i] = init.mean + init.sd * rng.normal(0); break;
      case InitSpec::Kind::from_density:
        if (!init.density) throw ConfigError("simulate: init density missing");
        x[i] = init.density->quantile(rng.uniform(0));
        break;
    }
  }
  return x;
}

void check_blowup(std::span<const double> x, std::size_t step) {
  for (double v : x)
    if (!(std::abs(v) <= 1e6)) {
      std::ostringstream os;
      os << "simulate: particle diverged at step " << step;
      throw NumericError(os.str());
    }
}

}  // namespace

ParticleEnsemble simulate_system(const PotentialModel& pm, std::size_t N, double T, double dt,
                                 std::uint64_t seed, const InitSpec& init) {
  if (N < 1) throw ConfigError("simulate_system: N must be >= 1");
  check_model_and_step(pm, dt);
  const std::size_t steps = validated_steps(T, dt);

  std::vector<double> x = draw_initial(N, seed, init);
  std::vector<CounterRng> noise(N);
  for (std::size_t i = 0; i < N; ++i) noise[i] = CounterRng::stream(seed, i).substream(0);

  std::vector<double> drift(N);
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t s = 0; s < steps; ++s) {
    pairwise_drift(pm, x, drift);
    for (std::size_t i = 0; i < N; ++i)
      x[i] += drift[i] * dt + sqrt_dt * noise[i].normal(s);
    check_blowup(x, s);
  }

  ParticleEnsemble e;
  e.positions = std::move(x);
  e.N = N;
  e.T = T;
  e.dt = dt;
  e.seed = seed;
  e.model_id = pm.model_id;
  return e;
}

CoupledPaths simulate_coupled(const PotentialModel& pm, const DensityFlow& flow, std::size_t N,
                              double T, double dt, std::uint64_t seed, const InitSpec& init) {
  if (N < 1) throw ConfigError("simulate_coupled: N must be >= 1");
  check_model_and_step(pm, dt);
  const std::size_t steps = validated_steps(T, dt);
  if (!flow.covers(T, dt)) throw ConfigError("simulate_coupled: flow does not cover [0, T]");

  std::vector<double> x = draw_initial(N, seed, init);
  std::vector<double> xbar = x;
  std::vector<CounterRng> noise(N);
  for (std::size_t i = 0; i < N; ++i) noise[i] = CounterRng::stream(seed, i).substream(0);

  const bool interacting = pm.interaction.kind != PairKind::zero;
  std::vector<double> wp_table;
  if (interacting)
    wp_table = kernel_difference_table(pm.interaction.w_prime, flow.densities.front().grid);

  std::vector<double> drift(N), xi(N);
  const double sqrt_dt = std::sqrt(dt);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = double(s) * dt;
    // copies see the deterministic law mu_t; their conditional drift is the
    // zero-interaction pairwise form plus the interpolated convolution
    pairwise_drift(pm, x, drift);
    for (std::size_t i = 0; i < N; ++i) xi[i] = noise[i].normal(s);
    for (std::size_t i = 0; i < N; ++i) x[i] += drift[i] * dt + sqrt_dt * xi[i];

    if (interacting) {
      const GridDensity& mu = flow.at_time(t);
      GridFunction conv(mu.grid, convolve_table(wp_table, mu.values, mu.grid.spacing()));
      for (std::size_t i = 0; i < N; ++i) {
        const double b = -confinement_eval(pm.confinement, xbar[i], 1) - 0.5 * conv(xbar[i]);
        xbar[i] += b * dt + sqrt_dt * xi[i];
      }
    } else {
      pairwise_drift(pm, xbar, drift);
      for (std::size_t i = 0; i < N; ++i) xbar[i] += drift[i] * dt + sqrt_dt * xi[i];
    }
    check_blowup(x, s);
    check_blowup(xbar, s);
  }

  CoupledPaths out;
  out.system_positions = std::move(x);
  out.copy_positions = std::move(xbar);
  out.seed = seed;
  return out;
}

std::complex<double> empirical_char_fn(const ParticleEnsemble& e, std::complex<double> z) {
  const double y = z.real();
  const double a = z.imag();
  std::complex<double> s = 0.0;
  for (double x : e.positions) {
    const double damp = -a * x;
    if (std::abs(damp) > 700.0)
      throw NumericError("empirical_char_fn: |Im(z) * X| > 700, exp overflow");
    s += std::polar(std::exp(damp), y * x);
  }
  return s / double(e.positions.size());
}

MomentReport moment_report(const ParticleEnsemble& e, const std::vector<int>& orders, double c) {
  if (e.positions.empty()) throw ConfigError("moment_report: empty ensemble");
  double max_abs = 0.0;
  for (double x : e.positions) max_abs = std::max(max_abs, std::abs(x));
  if (std::abs(c) * max_abs > 700.0)
    throw NumericError("moment_report: |c * max|X|| > 700, exp overflow");

  MomentReport rep;
  rep.c = c;
  const double inv_n = 1.0 / double(e.positions.size());
  for (int k : orders) {
    double s = 0.0;
    for (double x : e.positions) s += std::pow(x, k);
    rep.moments[k] = s * inv_n;
  }
  double sp = 0.0, sm = 0.0;
  for (double x : e.positions) {
    sp += std::exp(c * x);
    sm += std::exp(-c * x);
  }
  rep.exp_plus = sp * inv_n;
  rep.exp_minus = sm * inv_n;
  return rep;
}

}  // namespace mckv
