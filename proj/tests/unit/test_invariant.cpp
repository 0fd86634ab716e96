#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mckv/errors.hpp"
#include "mckv/invariant.hpp"
#include "mckv/wasserstein.hpp"

using namespace mckv;

TEST_SUITE_BEGIN("invariant");

namespace {

// Independent brute-force fixed point: plain undamped Picard sweep at a
// tight tolerance. Kept free of solve_invariant internals on purpose.
GridDensity brute_force_fixed_point(const PotentialModel& pm, const Grid& g, double tol,
                                    int max_iter) {
  std::vector<double> pi(g.n_points), target(g.n_points);
  const double dx = g.spacing();
  for (std::size_t i = 0; i < g.n_points; ++i)
    pi[i] = std::exp(-2.0 * confinement_eval(pm.confinement, g.point(i), 0));
  double z = trapezoid(pi, dx);
  for (auto& v : pi) v /= z;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < g.n_points; ++i) {
      double conv = 0.0;
      for (std::size_t j = 0; j < g.n_points; ++j)
        conv += interaction_eval(pm.interaction, g.point(i) - g.point(j), 0) * pi[j] *
                trapezoid_weight(j, g.n_points, dx);
      target[i] =
          std::exp(-2.0 * confinement_eval(pm.confinement, g.point(i), 0) - conv);
    }
    z = trapezoid(target, dx);
    double res = 0.0;
    for (std::size_t i = 0; i < g.n_points; ++i) {
      target[i] /= z;
      res = std::max(res, std::abs(target[i] - pi[i]));
    }
    pi = target;
    if (res <= tol) break;
  }
  return GridDensity::from_values(g, pi);
}

}  // namespace

TEST_CASE("solve_invariant: zero interaction reduces to a Gaussian") {
  auto zi1 = builtin_model("zero_interaction", {{"alpha", 1.0}});
  auto pi1 = solve_invariant(zi1, Grid(-6.0, 6.0, 2049), 1e-10);
  CHECK(pi1(0.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-6));
  CHECK(pi1.mass() == doctest::Approx(1.0).epsilon(1e-12));

  auto zi05 = builtin_model("zero_interaction", {{"alpha", 0.5}});
  auto pi05 = solve_invariant(zi05, default_invariant_grid(), 1e-10);
  CHECK(pi05(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-6));
}

TEST_CASE("solve_invariant: hermite fixed point against the brute-force oracle") {
  auto pm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  auto pi = solve_invariant(pm, default_invariant_grid(), 1e-10, 500, 0.5);
  CHECK(residual(pm, pi) < 1e-10);

  // value frozen from the 8193-point brute-force run at tol 1e-13; the
  // in-test oracle below re-derives it on the default grid
  const double frozen_pi0 = 0.4265664245;
  CHECK(pi(0.0) == doctest::Approx(frozen_pi0).epsilon(2e-9));

  auto oracle = brute_force_fixed_point(pm, Grid(-8.5, 8.5, 1025), 1e-13, 100000);
  CHECK(oracle(0.0) == doctest::Approx(frozen_pi0).epsilon(2e-7));  // coarser-grid oracle
}

TEST_CASE("solve_invariant: precondition and failure modes") {
  auto pm = builtin_model("hermite", {});
  CHECK_THROWS_AS(solve_invariant(pm, Grid(-3.0, 3.0, 257)), ConfigError);  // grid too narrow
  CHECK_THROWS_AS(solve_invariant(pm, default_invariant_grid(), -1.0), ConfigError);
  CHECK_THROWS_AS(solve_invariant(pm, default_invariant_grid(), 1e-10, 2, 0.5), NumericError);
}

TEST_CASE("residual") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid g(-6.0, 6.0, 2049);
  auto exact = GridDensity::gaussian(g, 0.0, 0.5);  // e^{-x^2}/sqrt(pi)
  CHECK(residual(zi, exact) < 1e-12);

  auto uniform = GridDensity::from_values(g, std::vector<double>(g.n_points, 1.0));
  CHECK(residual(zi, uniform) > 0.1);

  auto pm = builtin_model("hermite", {});
  auto pi = solve_invariant(pm, default_invariant_grid(), 1e-9);
  CHECK(residual(pm, pi) <= 1e-9);
}

TEST_CASE("exact_log_derivative") {
  auto zi1 = builtin_model("zero_interaction", {{"alpha", 1.0}});
  auto pi1 = solve_invariant(zi1, Grid(-6.0, 6.0, 2049));
  CHECK(exact_log_derivative(zi1, pi1, 1.5) == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(pi1.derivative_values.has_value());

  auto zi05 = builtin_model("zero_interaction", {{"alpha", 0.5}});
  auto pi05 = solve_invariant(zi05, default_invariant_grid());
  CHECK(exact_log_derivative(zi05, pi05, 2.0) == doctest::Approx(-2.0).epsilon(1e-12));

  auto herm = builtin_model("hermite", {});
  auto pih = solve_invariant(herm, default_invariant_grid());
  CHECK(exact_log_derivative(herm, pih, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("derivative consistency: finite differences of pi match l * pi") {
  auto pm = builtin_model("hermite", {});
  auto pi = solve_invariant(pm, default_invariant_grid());
  exact_log_derivative(pm, pi, 0.0);
  REQUIRE(pi.derivative_values.has_value());
  const auto& dpi = *pi.derivative_values;
  const double dx = pi.grid.spacing();
  for (std::size_t i = 1; i + 1 < pi.grid.n_points; ++i) {
    const double x = pi.grid.point(i);
    if (std::abs(x) > 3.0) continue;
    const double fd = (pi.values[i + 1] - pi.values[i - 1]) / (2.0 * dx);
    CHECK(std::abs(fd - dpi[i]) < 1e-4 * std::max(std::abs(dpi[i]), 1e-3));
  }
}

TEST_CASE("derivative growth bound of the invariant density") {
  // |pi^(n)(x)| <= c (1+|x|)^n exp(-C_V x^2) for n = 1, 2 with the constant
  // fitted on |x| <= 2; finite differences, away from the round-off tail.
  auto pm = builtin_model("hermite", {});
  auto pi = solve_invariant(pm, default_invariant_grid());
  const double dx = pi.grid.spacing();
  for (int n = 1; n <= 2; ++n) {
    double c_fit = 0.0;
    auto deriv = [&](std::size_t i) {
      return (n == 1) ? (pi.values[i + 1] - pi.values[i - 1]) / (2 * dx)
                      : (pi.values[i + 1] - 2 * pi.values[i] + pi.values[i - 1]) / (dx * dx);
    };
    auto envelope = [&](double x) {
      return std::pow(1.0 + std::abs(x), n) * std::exp(-pm.confinement.C_V * x * x);
    };
    for (std::size_t i = 1; i + 1 < pi.grid.n_points; ++i)
      if (std::abs(pi.grid.point(i)) <= 2.0)
        c_fit = std::max(c_fit, std::abs(deriv(i)) / envelope(pi.grid.point(i)));
    CHECK(c_fit > 0.0);
    CHECK(std::isfinite(c_fit));
    for (std::size_t i = 1; i + 1 < pi.grid.n_points; ++i)
      if (pi.values[i] > 1e-8)
        CHECK(std::abs(deriv(i)) <= 3.0 * c_fit * envelope(pi.grid.point(i)));
  }
}

TEST_CASE("invariant density symmetry") {
  auto pm = builtin_model("hermite", {});
  auto pi = solve_invariant(pm, default_invariant_grid(), 1e-10);
  const std::size_t n = pi.grid.n_points;
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    asym = std::max(asym, std::abs(pi.values[i] - pi.values[n - 1 - i]));
  CHECK(asym < 1e-10);
}

TEST_CASE("check_gaussian_sandwich") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  auto pi = solve_invariant(zi, Grid(-6.0, 6.0, 2049));
  auto fit = check_gaussian_sandwich(zi, pi, 4.0);
  CHECK(fit.pass);
  CHECK(fit.c1 == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-6));
  CHECK(fit.c2 == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-6));

  auto herm = builtin_model("hermite", {});
  auto pih = solve_invariant(herm, default_invariant_grid());
  auto fith = check_gaussian_sandwich(herm, pih, 4.0);
  CHECK(fith.pass);
  CHECK(fith.c1 > 0.0);
  CHECK(fith.c2 >= fith.c1);

  // heavy tail patch outside the fit window must break the upper envelope
  auto corrupted = pih;
  std::vector<double> vals = corrupted.values;
  for (std::size_t i = 0; i < vals.size(); ++i)
    if (std::abs(corrupted.grid.point(i)) > 5.0) vals[i] = 1e-3;
  corrupted = GridDensity::from_values(corrupted.grid, vals);
  CHECK_FALSE(check_gaussian_sandwich(herm, corrupted, 4.0).pass);
}

TEST_CASE("fokker_planck_evolve: stationary start stays put") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid g(-8.0, 8.0, 2049);
  auto mu0 = GridDensity::gaussian(g, 0.0, 0.5);
  const double dt = 0.39 * g.spacing() * g.spacing();
  auto flow = fokker_planck_evolve(zi, mu0, 1.0, dt, 1.0);
  REQUIRE(flow.densities.size() == 2);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i)
    sup = std::max(sup, std::abs(flow.densities.back().values[i] - mu0.values[i]));
  CHECK(sup < 1e-4);
  CHECK(flow.densities.back().mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fokker_planck_evolve: OU variance relaxation") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid g(-8.0, 8.0, 1025);
  auto mu0 = GridDensity::gaussian(g, 0.0, 1.0);
  const double dt = 0.39 * g.spacing() * g.spacing();
  auto flow = fokker_planck_evolve(zi, mu0, 1.0, dt, 0.25);
  for (std::size_t k = 0; k < flow.times.size(); ++k) {
    double var = 0.0;
    for (std::size_t i = 0; i < g.n_points; ++i) {
      const double x = g.point(i);
      var += x * x * flow.densities[k].values[i] * trapezoid_weight(i, g.n_points, g.spacing());
    }
    const double expect = 0.5 + 0.5 * std::exp(-2.0 * flow.times[k]);
    CHECK(var == doctest::Approx(expect).epsilon(2e-4));
  }
}

TEST_CASE("fokker_planck_evolve: relaxation to the interacting fixed point" *
          doctest::timeout(120)) {
  auto pm = builtin_model("hermite", {});
  auto pi = solve_invariant(pm, default_invariant_grid());
  const Grid g(-8.0, 8.0, 513);
  auto mu0 = GridDensity::gaussian(g, 0.0, 1.0);
  const double dt = 0.39 * g.spacing() * g.spacing();
  auto flow = fokker_planck_evolve(pm, mu0, 22.0, dt, 22.0);
  CHECK(wasserstein1(flow.densities.back(), pi) < 1e-3);
}

TEST_CASE("fokker_planck_evolve: step-size precondition") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid g(-8.0, 8.0, 257);
  auto mu0 = GridDensity::gaussian(g, 0.0, 0.5);
  CHECK_THROWS_AS(fokker_planck_evolve(zi, mu0, 1.0, g.spacing()), ConfigError);
}

TEST_CASE("DensityFlow::covers") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid g(-8.0, 8.0, 257);
  auto mu0 = GridDensity::gaussian(g, 0.0, 0.5);
  const double dt = 0.39 * g.spacing() * g.spacing();
  auto flow = fokker_planck_evolve(zi, mu0, 0.5, dt, 0.01);
  CHECK(flow.covers(0.5, 0.01));
  CHECK_FALSE(flow.covers(1.0, 0.01));
  CHECK_FALSE(flow.covers(0.5, 0.004));
}

TEST_CASE("GridDensity construction guards") {
  const Grid g(-1.0, 1.0, 101);
  std::vector<double> vals(101, 1.0);
  auto d = GridDensity::from_values(g, vals);
  CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-12));
  vals[50] = -1.0;
  CHECK_THROWS_AS(GridDensity::from_values(g, vals), NumericError);
  vals[50] = -1e-9;  // round-off-scale negative clips to zero
  auto d2 = GridDensity::from_values(g, vals);
  CHECK(d2.values[50] == 0.0);
}

TEST_SUITE_END();
