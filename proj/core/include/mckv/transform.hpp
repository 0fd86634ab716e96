#pragma once

#include <complex>
#include <span>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/grid.hpp"
#include "mckv/particle.hpp"

namespace mckv {

// F(f) sampled along the horizontal complex line L_a = {y + ia}.
struct LineTransform {
  double a = 0.0;
  std::vector<double> y_values;  // strictly increasing, uniform
  std::vector<std::complex<double>> values;

  double y_spacing() const { return y_values[1] - y_values[0]; }
};

// Symmetric uniform frequency grid on [-y_max, y_max].
std::vector<double> frequency_grid(double y_max, std::size_t n_freq);

// F(f)(y + ia) = int f(x) exp(i(y + ia)x) dx by trapezoid quadrature over
// f's grid. Guards |a| * |x| <= 700 on the support of f.
LineTransform forward_line_transform(const GridFunction& f, double a,
                                     std::span<const double> y_grid);

// Exact empirical sums (1/N) sum_j exp(i(y + ia) X_j), no quadrature error.
LineTransform empirical_line_transform(const ParticleEnsemble& e, double a,
                                       std::span<const double> y_grid);

// F(density)(z) for a single complex z = y + ia, by quadrature.
std::complex<double> density_char_fn(const GridDensity& d, std::complex<double> z);

struct InverseTransformResult {
  GridFunction f;                  // real part of the contour integral
  double imag_residue_ratio = 0;   // ||Im||_2 / ||Re||_2 before discarding
  bool tail_warning = false;       // |F| at y_max not below 1e-3 * max |F|
};

// f(x) = (1/2pi) int_{-y_max}^{y_max} F(y + ia) exp(-i(y + ia)x) dy.
InverseTransformResult inverse_line_transform(const LineTransform& F, const Grid& x_grid);

}  // namespace mckv
