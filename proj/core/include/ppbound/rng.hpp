#pragma once

#include <cstdint>
#include <random>

namespace ppbound {

using Seed = std::uint64_t;

/// Largest Poisson mean the sampler accepts. Beyond this the point buffer
/// alone would not fit in memory.
inline constexpr double kMaxPoissonMean = 1.0e12;

/// Mixes a master seed and a replicate index into an independent 64-bit seed.
/// Pure function of its arguments, so a replicate's stream never depends on
/// which worker ran it or in what order.
Seed derive_replicate_seed(Seed master, std::uint64_t replicate_id) noexcept;

/// Thin wrapper over mt19937_64 with distribution code written out by hand:
/// the std:: distributions are implementation-defined, which would make
/// results differ between standard libraries.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Exact Poisson variate. Inversion below mean 30, PTRS rejection above.
  /// Throws ConfigError for negative, non-finite or oversized means.
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t poisson_inversion(double mean);
  std::uint64_t poisson_ptrs(double mean);

  std::mt19937_64 engine_;
};

/// log(k!) without touching the global state lgamma() writes to.
double log_factorial(std::uint64_t k) noexcept;

}  // namespace ppbound
