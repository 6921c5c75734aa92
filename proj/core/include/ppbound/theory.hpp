#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ppbound/rng.hpp"
#include "ppbound/weights.hpp"

namespace ppbound {

/// Law of the rescaled truncated maximum Z- on a flat cell, parametrized by
/// lambda = n c nu_r m_r (the expected number of points below level m_r).
struct CellLaw {
  double lambda = 1.0;
};

/// P(Z- <= t): 0 for t < 0, exp(t - lambda) on [0, lambda], 1 above. The
/// value at t = 0 is the atom exp(-lambda) of the empty cell.
double zminus_cdf(CellLaw law, double t) noexcept;

struct ZMinusMoments {
  double mean = 0.0;        // lambda - (1 - e^-lambda)
  double variance = 0.0;    // 1 - 2 lambda e^-lambda - e^-2lambda
  double ratio_mean = 0.0;  // E(Z- / N-) = 1 - e^-lambda (1 + lambda), with 0/0 := 0
};
ZMinusMoments zminus_moments(CellLaw law) noexcept;

/// P(Z- <= t | N- = q) = (t / lambda)^q. Throws DomainError for t outside
/// [0, lambda] or lambda <= 0.
double conditional_max_cdf(CellLaw law, double t, std::uint64_t q);

/// One direct draw of (Z-, N-): N- ~ Poisson(lambda), Z- = lambda * max of N-
/// uniforms (0 when N- = 0). Independent of the point-process pipeline.
struct ZMinusDraw {
  double z = 0.0;
  std::uint64_t count = 0;
  double ratio() const noexcept { return count == 0 ? 0.0 : z / static_cast<double>(count); }
};
ZMinusDraw draw_zminus(CellLaw law, Rng& rng);

// ---------------------------------------------------------------------------
// Triangular-array checker for theta_n = sum_r w_r zeta_r, w_r in R^p.

/// Rectangular k x p array, row r holds the vector w_r.
struct WeightArray {
  std::size_t cells = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t i) const { return values[r * dim + i]; }
};

/// Stacks normalized weight rows of p probe points into a k x p array.
WeightArray weight_array_from_rows(const std::vector<WeightRow>& rows);

struct ArrayCheckInput {
  WeightArray weights;
  /// Directions lambda at which sum_r <w_r, lambda>^2 is evaluated.
  std::vector<std::vector<double>> directions;
  /// Optional p x p target covariance, row-major.
  std::optional<std::vector<double>> sigma;
  /// Optional standardized samples per cell (samples[r] are draws of zeta_r).
  std::vector<std::vector<double>> samples;
  /// Truncation levels for the Lindeberg-type tail proxy.
  std::vector<double> alphas{1.0, 2.0, 4.0};
  /// A.4 passes when max_r ||w_r|| <= this.
  double max_norm_tolerance = 0.25;
};

struct ArrayDiagnostics {
  std::vector<double> quad_form;         // per direction
  std::vector<double> target_quad_form;  // lambda' Sigma lambda, when sigma given
  double max_norm = 0.0;
  bool a4_satisfied = false;
  std::optional<double> variance_error;  // max_r |E(zeta_r^2) - 1|
  std::vector<double> lindeberg_tail;    // max_r E(zeta_r^2 1{|zeta_r| > alpha}) per alpha
};

/// Throws ConfigError if the array is not rectangular or a direction has the
/// wrong length.
ArrayDiagnostics check_array(const ArrayCheckInput& input);

}  // namespace ppbound
