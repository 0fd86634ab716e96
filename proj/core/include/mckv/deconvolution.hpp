#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mckv/contrast.hpp"
#include "mckv/density.hpp"
#include "mckv/kernels.hpp"
#include "mckv/transform.hpp"

namespace mckv {

enum class RegMode {
  oracle_shift,  // denominator = F(pi_oracle) + eps_NT (validation runs)
  clip,          // denominator = F(Pi_NT) lifted to modulus >= eps_NT
};

struct DeconvolutionSettings {
  double a = 0.0;
  double y_max = 20.0;
  std::size_t n_freq = 4097;
  double eps_NT = 0.0;  // 0 means take the schedule value from the config
  RegMode mode = RegMode::oracle_shift;
};

struct DivideResult {
  LineTransform ratio;            // F(W'_{N,T}) = -F(Psi)/denominator
  double min_denominator = 0.0;   // floor invariant: >= eps_NT at every frequency
  std::size_t clipped_count = 0;  // frequencies where the modulus was lifted
};

// Tikhonov-regularized spectral division. In oracle_shift mode the
// denominator is F(pi_oracle) + eps_NT; in clip mode it is the empirical
// transform, rescaled (phase preserved, zero gets phase +1) wherever its
// modulus falls under eps_NT. Both modes guarantee |denominator| >= eps_NT;
// the rescale overshoots by one part in 2^50 so the floor survives rounding.
DivideResult regularized_divide(const LineTransform& F_psi, const LineTransform& F_den,
                                const std::optional<LineTransform>& F_pi_oracle,
                                double eps_NT, RegMode mode);

struct EstimationResult {
  GridFunction w_prime;   // W'_{N,T}
  GridFunction psi;       // Psi_{N,T}
  GridFunction l_est;     // thresholded log-density derivative
  GridFunction pi_est;    // kernel density estimate
  double alpha_hat = 0.0;
  EstimatorConfig config;       // with delta/c1_hat resolved
  double min_denominator = 0.0;
  std::size_t clipped_frequencies = 0;
  double imag_residue_ratio = 0.0;
  bool tail_warning = false;
  std::vector<std::string> warnings;
};

// Runs estimation steps 1-4: kernel density and derivative estimates,
// thresholded log-derivative, contrast estimate of alpha, Psi window,
// forward transforms, regularized division, inverse transform. `pm` supplies
// the known confinement; its interaction part is only touched for oracle
// wiring (the invariant density in oracle_shift mode). If cfg.delta is NaN it
// is resolved here: sandwich c1 from pi_oracle in oracle_shift mode,
// 0.1 * max pi_{N,T} in clip mode.
EstimationResult estimate_interaction(const ParticleEnsemble& e, const PotentialModel& pm,
                                      EstimatorConfig cfg, const DeconvolutionSettings& s,
                                      const Grid& x_grid, const WeightFunction& weight,
                                      const std::optional<GridDensity>& pi_oracle);

struct FtsReport {
  double integral_at_y_max = 0.0;   // int_{|y|<=y_max} |F(W')/F(pi)|^2 on L_{+-a}
  double integral_at_2y_max = 0.0;
  double growth_ratio = 0.0;        // relative increment when doubling y_max
  bool integral_converged = false;  // growth_ratio < 0.1
  double min_abs_f_pi = 0.0;        // zero scan on the line
  double min_abs_location = 0.0;
  double decay_slope = 0.0;         // log|F(pi)| vs log y over [fit_lo, fit_hi]
  double decay_slope_stderr = 0.0;
  bool pass = false;                // == integral_converged
};

// Transform-decay diagnostic for the ratio condition behind the
// deconvolution step, plus the zero scan and the polynomial-decay slope fit.
FtsReport fts_diagnostic(const std::function<double(double)>& w_prime_true,
                         const GridDensity& pi, double a, double y_max, double fit_lo = 10.0,
                         double fit_hi = 40.0);

}  // namespace mckv
