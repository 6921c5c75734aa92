#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ppbound/cells.hpp"
#include "ppbound/model.hpp"
#include "ppbound/weights.hpp"

namespace ppbound {

enum class EstimatorVariant {
  Smoothed,    // f_hat: sum nu_r kappa_r(x) (1 + 1/N_r) Y*_r with the scheme's own mode
  Simplified,  // f_tilde: the same with midpoint weights
  CountBased,  // f_circ: sum kappa_r(x) N_r / (n c)
};

enum class IntensityMode { Known, Estimated };

std::string to_string(EstimatorVariant v);
std::string to_string(IntensityMode m);

/// Core linear form sum_r nu_r kappa_r (1 + 1/N_r) Y*_r; empty cells add 0.
double smoothed_estimate(const CellStats& stats, std::span<const double> kappa);
/// sum_r kappa_r N_r / (n c).
double count_estimate(const CellStats& stats, std::span<const double> kappa, double c);

/// Throws DegenerateWeightsError if kappa_n(x) = 0, ConfigError on a
/// partition / stats mismatch.
double estimate_fhat(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                     std::span<const double> x);
double estimate_fsimplified(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                            std::span<const double> x);
/// Uses stats.c unless an intensity is given explicitly.
double estimate_fcount(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                       std::span<const double> x);
double estimate_fcount(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                       std::span<const double> x, double c);

/// a_hat = sum nu_r (1 + 1/N_r) Y*_r and c_hat = N(S) / (n a_hat).
/// `degenerate` is set (and c_hat left at 0) when a_hat == 0.
struct AreaIntensity {
  double a_hat = 0.0;
  double c_hat = 0.0;
  bool degenerate = false;
};
AreaIntensity estimate_a_and_c(const CellStats& stats);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Endpoints sum nu_r (kappa_r -/+ z kappa_n / N(S)) (1 + 1/N_r) Y*_r with z
/// the (1 + gamma) / 2 normal quantile. Throws DegenerateSampleError when
/// N(S) = 0 and DomainError for gamma outside [0, 1).
ConfidenceInterval confidence_interval(const CellStats& stats, const WeightRow& row, double gamma);
ConfidenceInterval confidence_interval(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                                       std::span<const double> x, double gamma);

struct EstimateResult {
  std::vector<double> x;
  double fhat = 0.0;
  double kappa_norm = 0.0;
  double se_hat = 0.0;  // kappa_n(x) / (n c_hat)
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  EstimatorVariant variant = EstimatorVariant::Smoothed;
  double a_hat = 0.0;
  double c_used = 0.0;
};

/// Evaluates one variant at every point. The interval is the explicit one
/// above for Smoothed / Simplified and NaN for CountBased; se_hat and the
/// interval are NaN when the sample is empty.
std::vector<EstimateResult> estimate_points(const CellStats& stats, const WeightScheme& scheme,
                                            const Partition& part, const std::vector<std::vector<double>>& points,
                                            EstimatorVariant variant, double gamma, IntensityMode c_mode);

/// CSV `x,fhat,se_hat,ci_lo,ci_hi,variant`; multi-dimensional points are
/// written as space-separated coordinates in the x column.
void write_estimates_csv(std::ostream& os, const std::vector<EstimateResult>& results);

}  // namespace ppbound
