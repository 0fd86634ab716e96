#pragma once

#include <optional>
#include <vector>

#include "mckv/grid.hpp"

namespace mckv {

// Probability density on a uniform grid. Nonnegative, trapezoid mass 1
// (renormalized at construction, |mass-1| <= 1e-9 afterwards). `normalizer`
// keeps the integral of the raw input before renormalization, i.e. the
// constant the caller divided by (Z_pi for the invariant solver).
struct GridDensity {
  Grid grid;
  std::vector<double> values;
  std::optional<std::vector<double>> derivative_values;  // pi' when available
  double normalizer = 1.0;

  GridDensity() = default;

  // Validates sign and normalizes. Raw values may carry tiny negative
  // round-off (clipped to 0); anything below -1e-6 * max is an error.
  static GridDensity from_values(Grid g, std::vector<double> raw);
  static GridDensity gaussian(Grid g, double mean, double variance);

  double operator()(double x) const;   // linear interpolation, 0 outside
  double mass() const;                 // trapezoid integral of values
  GridFunction as_function() const { return GridFunction(grid, values); }

  // Cumulative distribution at the grid nodes (trapezoid, clamped to [0,1]).
  std::vector<double> cdf() const;
  // Inverse CDF by monotone interpolation of cdf(); u outside (0,1) clamps.
  double quantile(double u) const;
};

// Time-indexed snapshots mu_t of a mean-field law.
struct DensityFlow {
  std::vector<double> times;
  std::vector<GridDensity> densities;

  const GridDensity& at_time(double t, double tol = 1e-9) const;
  bool covers(double T, double dt, double tol = 1e-9) const;
};

}  // namespace mckv
