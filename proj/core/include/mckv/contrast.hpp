#pragma once

#include <functional>
#include <string>

#include "mckv/grid.hpp"

namespace mckv {

// Integrable weight supported on [eps, 1], normalized to unit integral.
struct WeightFunction {
  std::string name;
  double eps = 0.9;
  std::function<double(double)> eval;  // 0 outside [eps, 1]
  double C2 = 0.0;                     // int x^2 w(x) dx
  double C_inf = 0.0;                  // sup x^2 w(x)
};

// Built-in weight families (all normalized): smooth bump
// exp(-1/((x-eps)(1-x))), quartic (x-eps)^2(1-x)^2, raised cosine, triangle,
// and the plain indicator.
WeightFunction bump_weight(double eps = 0.9);
WeightFunction quartic_weight(double eps = 0.9);
WeightFunction cosine_weight(double eps = 0.9);
WeightFunction triangle_weight(double eps = 0.9);
WeightFunction indicator_weight(double eps = 0.9);

// Minimal contrast estimate of the confinement coefficient:
//   alpha_hat = - int (l(x) + 2 tilde_v'(x)) x w_U(x) dx / (2 int x^2 w_U(x) dx)
// with w_U(x) = w(x/U)/U, both integrals by trapezoid quadrature on the
// grid of l_est (the discrete least-squares minimizer, so an exactly linear
// l is recovered exactly). Requires U >= 1 and grid coverage of [eps U, U].
double estimate_alpha(const GridFunction& l_est,
                      const std::function<double(double)>& tilde_v_prime,
                      const WeightFunction& w, double U);

// Psi_{N,T}(y) = (l(y) + 2 alpha_hat y + 2 tilde_v'(y)) 1_{|y| <= eps U},
// identically zero outside the window.
GridFunction build_psi(const GridFunction& l_est, double alpha_hat,
                       const std::function<double(double)>& tilde_v_prime, double eps, double U,
                       const Grid& grid);

}  // namespace mckv
