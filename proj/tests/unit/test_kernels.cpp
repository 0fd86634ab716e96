#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mckv/errors.hpp"
#include "mckv/invariant.hpp"
#include "mckv/kernels.hpp"

using namespace mckv;

TEST_SUITE_BEGIN("kernels");

namespace {

// quadrature oracle for kernel moments, independent of the closed forms
double kernel_moment(const HighOrderKernel& k, int j) {
  const int n = 400000;
  const double lo = -20.0, hi = 20.0;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == n) ? 0.5 * h : h;
    s += std::pow(x, j) * k.eval(x) * w;
  }
  return s;
}

double mean_sup_l_error(std::size_t N, double T, int seeds) {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid grid(-6.0, 6.0, 2049);
  auto pi = solve_invariant(zi, grid);
  const double c1 = check_gaussian_sandwich(zi, pi, 4.0).c1;
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    auto cfg = derive_config(zi, N, T, 2, 0.9, 0.0, c1);
    auto e = simulate_system(zi, N, T, 0.01, 1000 + std::uint64_t(s),
                             InitSpec::gaussian(0, 1));
    auto kern = make_kernel(cfg.m);
    auto d = estimate_density(e, kern, cfg.h0, grid);
    auto dp = estimate_density_derivative(e, kern, cfg.h1, grid);
    auto l = log_density_derivative(d, dp, cfg.delta);
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      const double x = grid.point(i);
      if (std::abs(x) > cfg.U) continue;
      sup = std::max(sup, std::abs(l.values[i] - (-2.0 * x)));
    }
    total += sup * sup;
  }
  return total / seeds;
}

}  // namespace

TEST_CASE("make_kernel: moment identities for m in {2, 4, 6, 8}") {
  for (int m : {2, 4, 6, 8}) {
    auto k = make_kernel(m);
    CHECK(kernel_moment(k, 0) == doctest::Approx(1.0).epsilon(1e-9));
    for (int j = 1; j < m; ++j) CHECK(std::abs(kernel_moment(k, j)) < 1e-8);
    CHECK(std::abs(kernel_moment(k, m)) > 0.1);
  }
  // m = 4 has the closed-form m-th moment -3
  CHECK(kernel_moment(make_kernel(4), 4) == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(make_kernel(2).eval(0.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
  CHECK_THROWS_AS(make_kernel(3), ConfigError);
  CHECK_THROWS_AS(make_kernel(10), ConfigError);
}

TEST_CASE("make_kernel: derivative consistency") {
  for (int m : {2, 4, 6}) {
    auto k = make_kernel(m);
    const double h = 1e-6;
    for (double x : {-2.3, -0.7, 0.0, 0.4, 1.9}) {
      const double fd = (k.eval(x + h) - k.eval(x - h)) / (2.0 * h);
      CHECK(k.deriv(x) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("derive_config: bandwidth schedule") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  // N_T within 1e-7 of 1e6: N = 1e6 and a horizon long enough to kill the
  // exp(-lambda T) term
  auto cfg = derive_config(zi, 1000000, 40.0, 2, 0.5, 0.0);
  CHECK(cfg.N_T == doctest::Approx(1e6).epsilon(1e-7));
  CHECK(cfg.h0 == doctest::Approx(0.1).epsilon(1e-7));
  CHECK(cfg.h1 == doctest::Approx(std::pow(10.0, -0.75)).epsilon(1e-7));
  CHECK(cfg.h1 == doctest::Approx(0.17783).epsilon(1e-4));

  // C_tilde = C_V = 1, eps = 0.5: c_u = 0.25/1.0625, gamma = 0.25/17
  CHECK(cfg.C_tilde == doctest::Approx(1.0));
  CHECK(cfg.c_u == doctest::Approx(0.25 / 1.0625).epsilon(1e-12));
  CHECK(cfg.c_u == doctest::Approx(0.23529).epsilon(1e-4));
  CHECK(cfg.gamma == doctest::Approx(0.25 / 17.0).epsilon(1e-12));
  CHECK(cfg.gamma == doctest::Approx(0.014706).epsilon(1e-4));
  CHECK(cfg.U == doctest::Approx(std::sqrt(cfg.c_u * std::log(cfg.N_T))).epsilon(1e-12));
}

TEST_CASE("derive_config: hermite effective sample size") {
  auto pm = builtin_model("hermite", {{"alpha", 0.5}, {"theta", 0.5}});
  auto cfg = derive_config(pm, 10000, 34.0, 2, 0.9, 0.0);
  const double lambda = 0.5 - std::exp(-1.5);
  const double expect = 1.0 / (1e-4 + std::exp(-lambda * 34.0));
  CHECK(cfg.N_T == doctest::Approx(expect).epsilon(1e-12));
  CHECK(cfg.N_T == doctest::Approx(5500.0).epsilon(0.01));  // paper-scale magnitude
}

TEST_CASE("derive_config: eps_NT schedule and delta resolution") {
  auto pm = builtin_model("hermite", {});
  auto cfg = derive_config(pm, 4000, 30.0, 2, 0.9, 0.25);
  const double log_nt = std::log(cfg.N_T);
  const double expect = std::exp(0.5 * 0.25 * 0.9 * std::sqrt(cfg.c_u * log_nt)) *
                        std::pow(log_nt, 0.25) * std::pow(cfg.N_T, -0.5 * cfg.gamma);
  CHECK(cfg.eps_NT == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::isnan(cfg.delta));

  auto with = with_c1_hat(cfg, 0.4);
  CHECK(with.delta ==
        doctest::Approx(0.2 * std::exp(-with.C_tilde * with.U * with.U)).epsilon(1e-12));
  CHECK_THROWS_AS(with_c1_hat(cfg, -1.0), ConfigError);
}

TEST_CASE("derive_config: rejects m > J and bad eps") {
  auto ns = builtin_model("nonsmooth_confinement_J", {});  // J = 2
  CHECK_THROWS_AS(derive_config(ns, 1000, 10.0, 4, 0.9, 0.0), ConfigError);
  CHECK_NOTHROW(derive_config(ns, 1000, 10.0, 2, 0.9, 0.0));
  auto zi = builtin_model("zero_interaction", {});
  CHECK_THROWS_AS(derive_config(zi, 1000, 10.0, 2, 1.5, 0.0), ConfigError);
  CHECK_THROWS_AS(derive_config(zi, 1000, 10.0, 3, 0.9, 0.0), ConfigError);
}

TEST_CASE("estimate_density: point examples") {
  const Grid g(-6.0, 6.0, 2049);
  auto k = make_kernel(2);
  ParticleEnsemble one;
  one.positions = {0.0};
  one.N = 1;
  auto d1 = estimate_density(one, k, 1.0, g);
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(d1(0.0) == doctest::Approx(phi0).epsilon(1e-12));
  CHECK(d1(0.0) == doctest::Approx(0.39894).epsilon(1e-4));

  ParticleEnsemble two;
  two.positions = {-1.0, 1.0};
  two.N = 2;
  auto d2 = estimate_density(two, k, 1.0, g);
  const double phi1 = phi0 * std::exp(-0.5);
  CHECK(d2(0.0) == doctest::Approx(phi1).epsilon(1e-12));
  CHECK(d2(0.0) == doctest::Approx(0.24197).epsilon(1e-4));
}

TEST_CASE("estimate_density: OU sample sup error") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid g(-6.0, 6.0, 2049);
  auto pi = solve_invariant(zi, g);
  auto e = simulate_system(zi, 10000, 0.0, 0.01, 21, InitSpec::from_density(pi));
  auto d = estimate_density(e, make_kernel(2), std::pow(10000.0, -1.0 / 6.0), g);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.point(i);
    if (std::abs(x) > 2.0) continue;
    sup = std::max(sup, std::abs(d.values[i] - std::exp(-x * x) / std::sqrt(std::numbers::pi)));
  }
  CHECK(sup < 0.05);
}

TEST_CASE("estimate_density_derivative: point examples") {
  const Grid g(-6.0, 6.0, 2049);
  auto k = make_kernel(2);
  ParticleEnsemble one;
  one.positions = {0.0};
  one.N = 1;
  auto dp = estimate_density_derivative(one, k, 1.0, g);
  CHECK(dp(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  CHECK(dp(1.0) == doctest::Approx(-phi1).epsilon(1e-10));
  CHECK(dp(1.0) == doctest::Approx(-0.24197).epsilon(1e-4));

  ParticleEnsemble two;
  two.positions = {-1.0, 1.0};
  two.N = 2;
  CHECK(estimate_density_derivative(two, k, 1.0, g)(0.0) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("log_density_derivative: ratio and threshold") {
  const Grid g(0.0, 1.0, 3);
  GridFunction pi_est(g, {0.5, 0.05, 0.5});
  GridFunction pi_prime(g, {-1.0, -1.0, 1.0});
  auto l = log_density_derivative(pi_est, pi_prime, 0.1);
  CHECK(l.values[0] == doctest::Approx(-2.0));
  CHECK(l.values[1] == 0.0);  // below threshold
  CHECK(l.values[2] == doctest::Approx(2.0));
  CHECK_THROWS_AS(log_density_derivative(pi_est, pi_prime, 0.0), ConfigError);
}

TEST_CASE("log-density derivative estimate tracks -2y on an OU run") {
  auto zi = builtin_model("zero_interaction", {{"alpha", 1.0}});
  const Grid g(-6.0, 6.0, 2049);
  auto pi = solve_invariant(zi, g);
  const double c1 = check_gaussian_sandwich(zi, pi, 4.0).c1;
  auto cfg = derive_config(zi, 10000, 10.0, 2, 0.9, 0.0, c1);
  auto e = simulate_system(zi, 10000, 10.0, 0.01, 17, InitSpec::gaussian(0, 1));
  auto kern = make_kernel(2);
  auto d = estimate_density(e, kern, cfg.h0, g);
  auto dp = estimate_density_derivative(e, kern, cfg.h1, g);
  auto l = log_density_derivative(d, dp, cfg.delta);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double y = g.point(i);
    if (std::abs(y) > 1.0) continue;
    sup = std::max(sup, std::abs(l.values[i] + 2.0 * y));
  }
  CHECK(sup < 0.2);
}

TEST_CASE("plug-in consistency: risk decreases when N_T grows 16-fold") {
  const double small = mean_sup_l_error(500, 12.0, 6);
  const double large = mean_sup_l_error(8000, 12.0, 6);
  CHECK(large < small);
}

TEST_CASE("affine equivariance of the kernel estimates") {
  const Grid g(-6.0, 6.0, 1025);
  const double s = 0.5;
  const Grid gs(-5.5, 6.5, 1025);
  ParticleEnsemble e, es;
  e.positions = {0.25, -1.5, 0.75, 2.0};
  e.N = 4;
  es.positions = e.positions;
  for (auto& x : es.positions) x += s;
  es.N = 4;
  auto k = make_kernel(4);
  auto d = estimate_density(e, k, 0.3, g);
  auto ds = estimate_density(es, k, 0.3, gs);
  auto dp = estimate_density_derivative(e, k, 0.3, g);
  auto dps = estimate_density_derivative(es, k, 0.3, gs);
  for (std::size_t i = 0; i < g.n_points; ++i) {
    CHECK(ds.values[i] == doctest::Approx(d.values[i]).epsilon(1e-12));
    CHECK(dps.values[i] == doctest::Approx(dp.values[i]).epsilon(1e-12));
  }
}

TEST_SUITE_END();
