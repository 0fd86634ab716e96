#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mckv {

// Uniform 1-d grid on [x_min, x_max] with n_points nodes (n_points >= 2).
struct Grid {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_points = 0;

  Grid() = default;
  Grid(double lo, double hi, std::size_t n);

  double spacing() const { return (x_max - x_min) / double(n_points - 1); }
  double point(std::size_t i) const { return x_min + spacing() * double(i); }
  bool contains(double x) const { return x >= x_min && x <= x_max; }
  bool operator==(const Grid&) const = default;

  std::vector<double> points() const;
  // Largest i with point(i) <= x, clamped to [0, n_points-2].
  std::size_t cell_index(double x) const;
};

// Real-valued function sampled on a uniform grid. No sign or mass
// constraints; kernel estimates and deconvolution outputs live here.
struct GridFunction {
  Grid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(Grid g, std::vector<double> v);
  static GridFunction sample(const Grid& g, const std::function<double(double)>& f);

  // Linear interpolation; clamps outside the grid to the boundary values.
  double operator()(double x) const;

  double integral() const;                 // composite trapezoid
  double l2_norm() const;                  // sqrt(trapezoid of values^2)
  double sup_norm() const;
};

double trapezoid(std::span<const double> values, double dx);
// Trapezoid weight of node i on an n-node grid (dx/2 at the ends, dx inside).
double trapezoid_weight(std::size_t i, std::size_t n, double dx);

double l2_distance(const GridFunction& a, const GridFunction& b);

}  // namespace mckv
