#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/grid.hpp"

namespace mckv {

// Confinement V(x) = alpha/2 x^2 + tilde_v(x). tilde_v is even, has
// tilde_v'(0) = 0 and bounded derivatives 2..J; smoothness_J is empty for
// a C^inf perturbation (including tilde_v = 0).
struct ConfinementPotential {
  double alpha = 1.0;
  // (x, order) -> tilde_v^(order)(x); null when tilde_v = 0.
  std::function<double(double, int)> tilde_v_deriv;
  std::optional<int> smoothness_J;
  int max_tilde_order = 0;        // highest supported derivative order (J+2)
  std::vector<double> c_tilde;    // c_tilde[j] = sup |tilde_v^(j)|, j = 2..J
  double C_V = 1.0;               // alpha + inf tilde_v''

  bool has_tilde() const { return static_cast<bool>(tilde_v_deriv); }
  double c_tilde_2() const {
    return (c_tilde.size() > 2) ? c_tilde[2] : 0.0;
  }
  // alpha + c_tilde_2, the Gaussian lower-envelope exponent of the
  // invariant density.
  double C_tilde() const { return alpha + c_tilde_2(); }
};

// Analytic fast path used by the O(N^2) pairwise force loop.
enum class PairKind {
  zero,
  hermite,     // W'(d) = theta d exp(-d^2/2)
  gauss_sine,  // W'(d) = -sqrt(2/pi) exp(-d^2/2) (sin d + fdm_delta sin(fdm_m d))
  generic,     // fall back to the w_prime closure
};

struct InteractionPotential {
  std::function<double(double)> w;         // even, nonnegative
  std::function<double(double)> w_prime;   // odd, bounded, integrable
  std::function<double(double)> w_second;
  double C_W = 0.0;                        // -inf W''
  double tail_p = 0.5;                     // exponent in the squared-tail decay
  double l1_norm_wprime = 0.0;
  double sup_norm_wprime = 0.0;
  double support_radius = 0.0;  // |W'| below 1e-12 * sup outside this radius

  PairKind kind = PairKind::zero;
  double theta = 0.0;
  double fdm_delta = 0.0;
  double fdm_m = 0.0;
};

struct PotentialModel {
  ConfinementPotential confinement;
  InteractionPotential interaction;
  double lambda = 0.0;  // C_V - C_W, positive for a valid model
  std::string model_id;
  std::map<std::string, double> params;
};

struct ValidationEntry {
  std::string check;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool overall = true;
  std::string to_string() const;
};

// V^(order)(x). Throws ConfigError if order exceeds the supported
// derivative range (J+2 for a non-smooth perturbation).
double confinement_eval(const ConfinementPotential& cp, double x, int order);

// W^(order)(x), order in {0, 1, 2}.
double interaction_eval(const InteractionPotential& ip, double x, int order);

// Built-in models: zero_interaction, hermite, hermite_pair_f0,
// hermite_pair_f0_plus_fdm, nonsmooth_confinement_J.
// Recognized parameters: alpha, theta, kappa, J, delta, m.
// Throws ConfigError on unknown names or parameters that break the
// standing assumptions (lambda <= 0, C_V <= 0).
PotentialModel builtin_model(const std::string& name,
                             const std::map<std::string, double>& params = {});
std::vector<std::string> builtin_model_names();

ValidationReport validate_assumptions(const PotentialModel& pm);

// -V'(x) - 1/2 (W' * mu)(x), convolution by trapezoid quadrature on mu's
// grid. Throws NumericError when x is farther from the grid than the
// interaction support radius.
double mean_field_drift(const PotentialModel& pm, double x, const GridDensity& mu);

// -V'(x_i) - 1/(2N) sum_j W'(x_i - x_j); the j = i term is kept (W'(0) = 0).
double empirical_drift(const PotentialModel& pm, std::size_t i,
                       std::span<const double> positions);

}  // namespace mckv
