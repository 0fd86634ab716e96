#pragma once

#include <cstdint>

namespace mckv {

// Counter-based random stream: a splitmix64 finalizer applied to
// (key, counter). Streams are keyed by (seed, particle index) so that an
// N-sweep reuses the same noise for particle i at every N, and any draw is
// addressable without generator state.
struct CounterRng {
  std::uint64_t key = 0;

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  static CounterRng stream(std::uint64_t seed, std::uint64_t index) {
    return {splitmix(splitmix(seed) ^ (index * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull))};
  }
  // Sub-stream addressing for independent purposes (cells, initial draws).
  CounterRng substream(std::uint64_t index) const {
    return {splitmix(key ^ (index * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull))};
  }

  std::uint64_t bits(std::uint64_t counter) const { return splitmix(key ^ splitmix(counter)); }

  // Uniform in (0, 1), never exactly 0 or 1.
  double uniform(std::uint64_t counter) const {
    return (double(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; exactly two uniforms per draw, so the
  // consumption pattern is fixed (no rejection).
  double normal(std::uint64_t counter) const;
};

}  // namespace mckv
