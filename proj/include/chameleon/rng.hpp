#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace chameleon {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Root seed of an experiment. Trial i draws from the stream seeded with
/// splitmix64(seed ^ splitmix64(i + 1)), so any (seed, trial) pair is
/// reproducible in isolation and independent of thread scheduling.
struct RngSeed {
  std::uint64_t seed = 0;

  std::uint64_t trial_seed(std::uint64_t trial) const { return splitmix64(seed ^ splitmix64(trial + 1)); }
};

/// Per-trial random source. Variates are derived from raw 64-bit draws with
/// fixed formulas, so streams are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t s) : engine_(s) {}
  Rng(RngSeed root, std::uint64_t trial) : engine_(root.trial_seed(trial)) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  /// Uniform integer in [0, n), n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace chameleon
