#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <thread>
#include <vector>

#include "mckv/particle.hpp"

namespace mckv {
namespace {

// exp(x) for x <= 0, accurate to ~5e-9 relative. Inlines and vectorizes
// inside the pairwise loop (unlike libm exp), which is what makes the O(N^2)
// drift affordable. 2^k reconstruction by exponent bits, degree-6 polynomial
// on the residual. Branch-free: inputs below -708 clamp there (the result is
// ~3e-308, indistinguishable from 0 in a force sum).
inline double exp_neg(double x) {
  x = (x > -708.0) ? x : -708.0;
  const double log2e = 1.4426950408889634;
  const double t = x * log2e;
  const double k = std::nearbyint(t);
  const double z = (t - k) * 0.6931471805599453;
  double p = 1.0 / 720.0;
  p = p * z + 1.0 / 120.0;
  p = p * z + 1.0 / 24.0;
  p = p * z + 1.0 / 6.0;
  p = p * z + 0.5;
  p = p * z + 1.0;
  p = p * z + 1.0;
  const auto bits = std::uint64_t(std::int64_t(1023) + std::int64_t(k)) << 52;
  double scale;
  static_assert(sizeof(scale) == sizeof(bits));
  std::memcpy(&scale, &bits, sizeof(scale));
  return p * scale;
}

void interaction_rows(const PotentialModel& pm, std::span<const double> x,
                      std::span<double> out, std::size_t i0, std::size_t i1) {
  const std::size_t n = x.size();
  switch (pm.interaction.kind) {
    case PairKind::zero:
      for (std::size_t i = i0; i < i1; ++i) out[i] = 0.0;
      break;
    case PairKind::hermite: {
      const double theta = pm.interaction.theta;
      for (std::size_t i = i0; i < i1; ++i) {
        const double xi = x[i];
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double d = xi - x[j];
          s += d * exp_neg(-0.5 * d * d);
        }
        out[i] = theta * s;
      }
      break;
    }
    case PairKind::gauss_sine: {
      const double amp = std::sqrt(2.0 / 3.14159265358979323846);
      const double delta = pm.interaction.fdm_delta;
      const double m = pm.interaction.fdm_m;
      for (std::size_t i = i0; i < i1; ++i) {
        const double xi = x[i];
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double d = xi - x[j];
          s -= exp_neg(-0.5 * d * d) * (std::sin(d) + delta * std::sin(m * d));
        }
        out[i] = amp * s;
      }
      break;
    }
    case PairKind::generic: {
      const auto& wp = pm.interaction.w_prime;
      for (std::size_t i = i0; i < i1; ++i) {
        const double xi = x[i];
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += wp(xi - x[j]);
        out[i] = s;
      }
      break;
    }
  }
}

}  // namespace

void pairwise_drift(const PotentialModel& pm, std::span<const double> x, std::span<double> out,
                    int n_threads) {
  const std::size_t n = x.size();
  if (n_threads <= 0) n_threads = int(std::max(1u, std::thread::hardware_concurrency()));
  const bool interacting = pm.interaction.kind != PairKind::zero;

  if (interacting) {
    if (n_threads > 1 && n >= 1024) {
      std::vector<std::thread> pool;
      const std::size_t chunk = (n + std::size_t(n_threads) - 1) / std::size_t(n_threads);
      for (int t = 0; t < n_threads; ++t) {
        const std::size_t i0 = std::min(n, std::size_t(t) * chunk);
        const std::size_t i1 = std::min(n, i0 + chunk);
        if (i0 >= i1) break;
        pool.emplace_back([&, i0, i1] { interaction_rows(pm, x, out, i0, i1); });
      }
      for (auto& th : pool) th.join();
    } else {
      interaction_rows(pm, x, out, 0, n);
    }
  }

  const auto& cp = pm.confinement;
  const double half_inv_n = 0.5 / double(n);
  if (!cp.has_tilde()) {
    const double alpha = cp.alpha;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = -alpha * x[i] - (interacting ? half_inv_n * out[i] : 0.0);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = -confinement_eval(cp, x[i], 1) - (interacting ? half_inv_n * out[i] : 0.0);
  }
}

}  // namespace mckv
