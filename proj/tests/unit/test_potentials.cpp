#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mckv/density.hpp"
#include "mckv/errors.hpp"
#include "mckv/potentials.hpp"

using namespace mckv;

TEST_SUITE_BEGIN("potentials");

TEST_CASE("confinement_eval: quadratic potential") {
  auto pm = builtin_model("zero_interaction", {{"alpha", 1.0}});
  CHECK(confinement_eval(pm.confinement, 2.0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(confinement_eval(pm.confinement, 2.0, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(confinement_eval(pm.confinement, 2.0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(confinement_eval(pm.confinement, 2.0, 7) == 0.0);
  CHECK_THROWS_AS(confinement_eval(pm.confinement, 1.0, -1), ConfigError);
}

TEST_CASE("confinement_eval: cubic perturbation inside the cutoff plateau") {
  // tilde_v = 0.1 |x|^3 near the origin: tilde_v''(0.5) = 0.6 * 0.5 = 0.3,
  // so V''(0.5) = alpha + 0.3. The built-in uses the same kink with a C^{J+3}
  // cutoff that is identically 1 on [-1, 1].
  ConfinementPotential cp;
  cp.alpha = 1.0;
  cp.tilde_v_deriv = [](double x, int n) -> double {
    const double k = 0.1, ax = std::abs(x);
    double v = 0.0;
    switch (n) {
      case 0: v = k * ax * ax * ax; break;
      case 1: v = 3 * k * ax * ax; break;
      case 2: v = 6 * k * ax; break;
      case 3: v = 6 * k; break;
      default: v = 0.0;
    }
    if (x < 0.0 && n % 2 == 1) v = -v;
    return v;
  };
  cp.smoothness_J = 2;
  cp.max_tilde_order = 4;
  CHECK(confinement_eval(cp, 0.5, 2) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK_THROWS_AS(confinement_eval(cp, 0.5, 5), ConfigError);

  auto pm = builtin_model("nonsmooth_confinement_J", {{"alpha", 20.0}, {"kappa", 0.1}, {"J", 2}});
  CHECK(confinement_eval(pm.confinement, 0.5, 2) - 20.0 == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(confinement_eval(pm.confinement, 0.3, 3) == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(confinement_eval(pm.confinement, 2.5, 0) ==
        doctest::Approx(0.5 * 20.0 * 2.5 * 2.5).epsilon(1e-14));  // cutoff is 0 past |x| = 2
}

TEST_CASE("interaction_eval: hermite and zero") {
  auto herm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  CHECK(interaction_eval(herm.interaction, 0.0, 1) == 0.0);
  CHECK(interaction_eval(herm.interaction, 1.0, 1) ==
        doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-14));
  auto zero = builtin_model("zero_interaction", {});
  CHECK(interaction_eval(zero.interaction, 3.0, 2) == 0.0);
  CHECK_THROWS_AS(interaction_eval(herm.interaction, 1.0, 3), ConfigError);
}

TEST_CASE("builtin_model: hermite constants") {
  auto pm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  const double c_w = 2.0 * 0.5 * std::exp(-1.5);
  CHECK(pm.confinement.C_V == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pm.interaction.C_W == doctest::Approx(c_w).epsilon(1e-14));
  CHECK(pm.lambda == doctest::Approx(0.5 - c_w).epsilon(1e-12));

  // independent oracle for C_W: dense minimization of W'' on a grid
  double min_w2 = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double x = -10.0 + 20.0 * i / 200000.0;
    min_w2 = std::min(min_w2, interaction_eval(pm.interaction, x, 2));
  }
  CHECK(-min_w2 == doctest::Approx(pm.interaction.C_W).epsilon(1e-8));
}

TEST_CASE("builtin_model: zero interaction and rejection of invalid parameters") {
  auto pm = builtin_model("zero_interaction", {{"alpha", 1.0}});
  CHECK(pm.interaction.C_W == 0.0);
  CHECK(pm.lambda == doctest::Approx(1.0));
  // lambda = 0.1 - 2*2*exp(-3/2) < 0
  CHECK_THROWS_AS(builtin_model("hermite", {{"alpha", 0.1}, {"theta", 2.0}}), ConfigError);
  CHECK_THROWS_AS(builtin_model("no_such_model", {}), ConfigError);
  CHECK_THROWS_AS(builtin_model("hermite", {{"alpha", 0.5}, {"bogus", 1.0}}), ConfigError);
}

TEST_CASE("builtin_model: f0 pair members satisfy the assumptions") {
  auto f0 = builtin_model("hermite_pair_f0", {});
  // W'(x) = -sqrt(2/pi) exp(-x^2/2) sin x; W''(0) = -sqrt(2/pi)
  CHECK(interaction_eval(f0.interaction, 1.0, 1) ==
        doctest::Approx(-std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5) * std::sin(1.0))
            .epsilon(1e-12));
  CHECK(f0.interaction.C_W == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-6));
  CHECK(validate_assumptions(f0).overall);

  auto fdm = builtin_model("hermite_pair_f0_plus_fdm", {{"delta", 0.1}, {"m", 3.0}});
  CHECK(validate_assumptions(fdm).overall);
  CHECK(fdm.lambda > 0.0);
  // the perturbation steepens W'' at 0 by delta * m
  CHECK(fdm.interaction.C_W > f0.interaction.C_W);
}

TEST_CASE("validate_assumptions: pass and fail entries") {
  auto good = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  auto rep = validate_assumptions(good);
  CHECK(rep.overall);
  for (const auto& e : rep.entries) CHECK(e.pass);

  // an invalid model cannot come out of builtin_model, so assemble one by hand
  auto bad = good;
  bad.lambda = good.confinement.C_V - 4.0 * std::exp(-1.5);  // theta = 2
  bad.interaction.C_W = 4.0 * std::exp(-1.5);
  auto rep2 = validate_assumptions(bad);
  CHECK_FALSE(rep2.overall);
  bool lambda_failed = false;
  for (const auto& e : rep2.entries)
    if (!e.pass) lambda_failed = lambda_failed || e.check.find("lambda") != std::string::npos;
  CHECK(lambda_failed);

  CHECK(validate_assumptions(builtin_model("zero_interaction", {{"alpha", 1.0}})).overall);
}

TEST_CASE("mean_field_drift") {
  const Grid g(-8.0, 8.0, 2049);
  auto zero = builtin_model("zero_interaction", {{"alpha", 1.0}});
  auto mu = GridDensity::gaussian(g, 0.0, 1.0);
  CHECK(mean_field_drift(zero, 1.0, mu) == doctest::Approx(-1.0).epsilon(1e-14));

  auto herm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  CHECK(mean_field_drift(herm, 0.0, mu) == doctest::Approx(0.0).epsilon(1e-12));

  // narrow Gaussian approximates a point mass at 0: drift -V'(1) - W'(1)/2
  auto spike = GridDensity::gaussian(g, 0.0, 0.02 * 0.02);
  const double expect = -0.5 - 0.5 * 0.5 * std::exp(-0.5);
  CHECK(mean_field_drift(herm, 1.0, spike) == doctest::Approx(expect).epsilon(1e-3));
  CHECK(expect == doctest::Approx(-0.65163).epsilon(1e-4));

  CHECK_THROWS_AS(mean_field_drift(herm, 100.0, mu), NumericError);
}

TEST_CASE("empirical_drift") {
  auto zero = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const double one_particle[] = {2.0};
  CHECK(empirical_drift(zero, 0, one_particle) == doctest::Approx(-2.0).epsilon(1e-14));

  auto herm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  const double two_zero[] = {0.0, 0.0};
  CHECK(empirical_drift(herm, 0, two_zero) == 0.0);

  const double pair[] = {1.0, 0.0};
  const double expect = -0.5 - 0.25 * (0.0 + 0.5 * std::exp(-0.5));
  CHECK(empirical_drift(herm, 0, pair) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(expect == doctest::Approx(-0.57582).epsilon(1e-4));

  CHECK_THROWS_AS(empirical_drift(herm, 0, std::span<const double>{}), ConfigError);
  CHECK_THROWS_AS(empirical_drift(herm, 2, pair), ConfigError);
}

TEST_CASE("empirical drift matches mean-field drift for large iid samples") {
  auto herm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  const Grid g(-8.0, 8.0, 2049);
  auto mu = GridDensity::gaussian(g, 0.0, 0.8);
  // deterministic quantile stratification stands in for an iid draw
  const std::size_t n = 100000;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = mu.quantile((double(i) + 0.5) / double(n));
  for (double probe : {0.5, 1.0, 2.0}) {
    std::vector<double> with_probe = xs;
    with_probe.push_back(probe);
    const double emp = empirical_drift(herm, n, with_probe);
    const double mf = mean_field_drift(herm, probe, mu);
    CHECK(std::abs(emp - mf) < 0.01 * std::abs(mf));
  }
}

TEST_CASE("drift oddness under global sign flip") {
  auto herm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  std::vector<double> xs = {0.3, -1.2, 2.4, 0.9, -0.1};
  std::vector<double> flipped(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) flipped[i] = -xs[i];
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(empirical_drift(herm, i, flipped) == -empirical_drift(herm, i, xs));
}

TEST_CASE("W'' >= -C_W on a dense grid for every builtin") {
  for (const auto& name : builtin_model_names()) {
    auto pm = builtin_model(name, {});
    double min_w2 = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double x = -10.0 + 20.0 * i / 10000.0;
      min_w2 = std::min(min_w2, interaction_eval(pm.interaction, x, 2));
    }
    CHECK(min_w2 >= -pm.interaction.C_W - 1e-8);
  }
}

TEST_SUITE_END();
