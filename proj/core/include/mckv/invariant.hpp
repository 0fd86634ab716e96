#pragma once

#include <functional>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/grid.hpp"
#include "mckv/potentials.hpp"

namespace mckv {

// Kernel values on the signed difference grid of g: table[k + n - 1] =
// kernel((k) * dx) for k in [-(n-1), n-1]. Used to evaluate quadrature
// convolutions (kernel * f)(x_i) in O(n^2) multiply-adds without closure
// calls in the inner loop.
std::vector<double> kernel_difference_table(const std::function<double(double)>& kernel,
                                            const Grid& g);
std::vector<double> convolve_table(std::span<const double> table, std::span<const double> f,
                                   double dx);

Grid default_invariant_grid();  // [-8, 8] with 4097 points

// Damped Picard iteration on pi = exp(-2V - W * pi) / Z. Throws ConfigError
// if exp(-2V) exceeds 1e-14 at the grid endpoints, NumericError on
// non-convergence (message carries the last residual).
GridDensity solve_invariant(const PotentialModel& pm, const Grid& grid, double tol = 1e-10,
                            int max_iter = 500, double damping = 0.5);

// Sup-norm of pi - normalize(exp(-2V - W * pi)) over the grid.
double residual(const PotentialModel& pm, const GridDensity& pi);

// l(x) = pi'(x)/pi(x) = -2 V'(x) - (W' * pi)(x), evaluated exactly at x.
// First call fills pi.derivative_values with pi' = l * pi on the grid.
double exact_log_derivative(const PotentialModel& pm, GridDensity& pi, double x);

// l on the whole grid (same identity, no thresholding).
GridFunction exact_log_derivative_grid(const PotentialModel& pm, GridDensity& pi);

struct SandwichFit {
  double c1 = 0.0;  // largest constant with pi >= c1 exp(-C_tilde x^2) on the window
  double c2 = 0.0;  // smallest constant with pi <= c2 exp(-C_V x^2) on the window
  bool pass = false;
};

// Fits the Gaussian envelope constants over |x| <= x_range. Passes when both
// constants are positive and finite and the upper envelope fitted on the
// window keeps holding on the full grid within a factor of 10.
SandwichFit check_gaussian_sandwich(const PotentialModel& pm, const GridDensity& pi,
                                    double x_range);

// Explicit conservative finite-volume step for
//   d_t mu = 1/2 mu'' + d_x((V' + 1/2 W' * mu) mu),
// central advection where the cell Peclet number allows, upwind otherwise.
// Zero-flux boundaries. Snapshots stored every store_dt (0 stores only t = 0
// and t = T); each snapshot is renormalized. Requires dt <= 0.4 dx^2.
DensityFlow fokker_planck_evolve(const PotentialModel& pm, const GridDensity& mu0, double T,
                                 double dt, double store_dt = 0.0);

}  // namespace mckv
