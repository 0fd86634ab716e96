#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/potentials.hpp"

namespace mckv {

struct ParticleEnsemble {
  std::vector<double> positions;  // X_T^{i,N}
  std::size_t N = 0;
  double T = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::string model_id;
};

// System particles and their synchronously coupled mean-field copies
// (identical Brownian increments and initial positions per index).
struct CoupledPaths {
  std::vector<double> system_positions;
  std::vector<double> copy_positions;
  std::uint64_t seed = 0;
};

// Initial condition sampler.
struct InitSpec {
  enum class Kind { point, gaussian, from_density };
  Kind kind = Kind::point;
  double x0 = 0.0;
  double mean = 0.0;
  double sd = 1.0;
  std::shared_ptr<const GridDensity> density;

  static InitSpec point(double x) { return {Kind::point, x, 0.0, 1.0, nullptr}; }
  static InitSpec gaussian(double mean, double sd) {
    return {Kind::gaussian, 0.0, mean, sd, nullptr};
  }
  static InitSpec from_density(GridDensity d) {
    InitSpec s;
    s.kind = Kind::from_density;
    s.density = std::make_shared<GridDensity>(std::move(d));
    return s;
  }
};

// Fills out[i] = -V'(x[i]) - 1/(2N) sum_j W'(x[i] - x[j]). Rows are
// distributed over threads; each row is summed in index order by a single
// thread, so the result does not depend on the thread count.
void pairwise_drift(const PotentialModel& pm, std::span<const double> x,
                    std::span<double> out, int n_threads = 0);

// Euler-Maruyama for the N-particle system with unit diffusion. Requires a
// valid model (lambda > 0) and dt <= 0.1 / max(alpha + C_W, 1). Throws
// NumericError naming the step if any |x_i| exceeds 1e6.
ParticleEnsemble simulate_system(const PotentialModel& pm, std::size_t N, double T, double dt,
                                 std::uint64_t seed, const InitSpec& init);

// System plus coupled McKean-Vlasov copies driven by mu_t from `flow`
// (which must cover [0, T] at every dt multiple).
CoupledPaths simulate_coupled(const PotentialModel& pm, const DensityFlow& flow, std::size_t N,
                              double T, double dt, std::uint64_t seed, const InitSpec& init);

// (1/N) sum_j exp(i z X_j) evaluated exactly. For z = y + ia the factor
// exp(-a X_j) is guarded: |a X_j| > 700 throws NumericError.
std::complex<double> empirical_char_fn(const ParticleEnsemble& e, std::complex<double> z);

struct MomentReport {
  std::map<int, double> moments;  // order -> empirical E[X^k]
  double c = 0.0;
  double exp_plus = 1.0;   // E[exp(+cX)]
  double exp_minus = 1.0;  // E[exp(-cX)]
};

MomentReport moment_report(const ParticleEnsemble& e, const std::vector<int>& orders, double c);

}  // namespace mckv
