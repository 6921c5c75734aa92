#include "ppbound/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ppbound/errors.hpp"

namespace ppbound {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::size_t kLogFactTable = 1024;

const std::array<double, kLogFactTable>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactTable> t{};
    t[0] = 0.0;
    for (std::size_t i = 1; i < kLogFactTable; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return table;
}

}  // namespace

Seed derive_replicate_seed(Seed master, std::uint64_t replicate_id) noexcept {
  // Two rounds so that nearby (master, id) pairs land far apart.
  return splitmix64(splitmix64(master) ^ splitmix64(replicate_id + 0x632be59bd9b4e019ULL));
}

double log_factorial(std::uint64_t k) noexcept {
  if (k < kLogFactTable) return log_factorial_table()[k];
  const double x = static_cast<double>(k);
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

std::uint64_t Rng::poisson(double mean) {
  if (!std::isfinite(mean) || mean < 0.0) {
    throw ConfigError("poisson mean must be finite and nonnegative, got " + std::to_string(mean));
  }
  if (mean > kMaxPoissonMean) {
    throw ConfigError("poisson mean " + std::to_string(mean) + " exceeds sampler range");
  }
  if (mean == 0.0) return 0;
  return mean < 30.0 ? poisson_inversion(mean) : poisson_ptrs(mean);
}

std::uint64_t Rng::poisson_inversion(double mean) {
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  // The tail beyond 200 at mean < 30 has probability far below 2^-53.
  while (u >= cdf && k < 200) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables".
std::uint64_t Rng::poisson_ptrs(double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::uint64_t>(kd);
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + kd * loglam - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace ppbound
