#pragma once

#include <functional>
#include <optional>

#include "mckv/grid.hpp"
#include "mckv/particle.hpp"
#include "mckv/potentials.hpp"

namespace mckv {

// Gaussian-weighted polynomial kernel of even order m: unit mass, vanishing
// moments 1..m-1, nonzero m-th moment.
struct HighOrderKernel {
  int order_m = 2;
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  double support_radius = 10.0;  // |K| below 1e-15 * peak outside
};

// m in {2, 4, 6, 8}.
HighOrderKernel make_kernel(int m);

// Tuning scalars of the estimation pipeline, all derived from closed-form
// schedules in terms of N_T = (1/N + exp(-lambda T))^{-1}.
struct EstimatorConfig {
  int m = 2;
  double N_T = 0.0;
  double h0 = 0.0;     // N_T^{-1/(2(m+1))}
  double h1 = 0.0;     // N_T^{-1/(2(m+2))}
  double delta = 0.0;  // (c1_hat/2) exp(-C_tilde U^2); NaN until c1_hat known
  double U = 0.0;      // sqrt(c_u log N_T)
  double eps = 0.9;    // weight-support parameter, in (0,1)
  double c_u = 0.0;
  double gamma = 0.0;
  double a = 0.0;           // line offset used downstream
  double eps_NT = 0.0;      // regularization floor
  double c1_hat = 0.0;      // NaN when left for data-driven resolution
  double C_tilde = 0.0;     // alpha + c_tilde_2
  double C_V = 0.0;
};

// Derives the full schedule. c1_hat may be left unset (NaN): delta is then
// resolved later, from the sandwich fit of an oracle density or from
// 0.1 * max pi_{N,T} in data-driven runs. Requires eps in (0,1) and, for a
// non-smooth confinement, m <= J.
EstimatorConfig derive_config(const PotentialModel& pm, std::size_t N, double T, int m,
                              double eps, double a,
                              std::optional<double> c1_hat = std::nullopt);

// Fills delta once c1_hat is known.
EstimatorConfig with_c1_hat(EstimatorConfig cfg, double c1_hat);

// pi_{N,T}(y) = (1/(N h0)) sum_i K((y - X_i)/h0). Not clipped to >= 0:
// higher-order kernels go negative.
GridFunction estimate_density(const ParticleEnsemble& e, const HighOrderKernel& k, double h0,
                              const Grid& grid);

// pi'_{N,T}(y) = (1/(N h1^2)) sum_i K'((y - X_i)/h1).
GridFunction estimate_density_derivative(const ParticleEnsemble& e, const HighOrderKernel& k,
                                         double h1, const Grid& grid);

// l_{N,T} = pi'_{N,T} / pi_{N,T} where pi_{N,T} > delta, exactly 0 elsewhere.
GridFunction log_density_derivative(const GridFunction& pi_est,
                                    const GridFunction& pi_prime_est, double delta);

}  // namespace mckv
