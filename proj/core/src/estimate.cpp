#include "ppbound/estimate.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "ppbound/errors.hpp"
#include "ppbound/normal.hpp"

namespace ppbound {

namespace {

void check_alignment(const CellStats& stats, std::size_t cells) {
  if (stats.cells() != cells) throw ConfigError("cell statistics do not match the partition");
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string to_string(EstimatorVariant v) {
  switch (v) {
    case EstimatorVariant::Smoothed: return "smoothed";
    case EstimatorVariant::Simplified: return "simplified";
    case EstimatorVariant::CountBased: return "count";
  }
  return "unknown";
}

std::string to_string(IntensityMode m) { return m == IntensityMode::Known ? "known" : "estimated"; }

double smoothed_estimate(const CellStats& stats, std::span<const double> kappa) {
  check_alignment(stats, kappa.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < kappa.size(); ++r) acc += kappa[r] * stats.corrected[r];
  return acc * stats.cell_measure();
}

double count_estimate(const CellStats& stats, std::span<const double> kappa, double c) {
  check_alignment(stats, kappa.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < kappa.size(); ++r) acc += kappa[r] * static_cast<double>(stats.counts[r]);
  return acc / (stats.n * c);
}

double estimate_fhat(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                     std::span<const double> x) {
  check_alignment(stats, part.size());
  return smoothed_estimate(stats, weight_row(scheme, part, x).kappa);
}

double estimate_fsimplified(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                            std::span<const double> x) {
  return estimate_fhat(stats, with_mode(scheme, WeightMode::Midpoint), part, x);
}

double estimate_fcount(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                       std::span<const double> x) {
  return estimate_fcount(stats, scheme, part, x, stats.c);
}

double estimate_fcount(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                       std::span<const double> x, double c) {
  if (!(c > 0.0)) throw ConfigError("intensity constant must be positive");
  check_alignment(stats, part.size());
  return count_estimate(stats, weight_row(scheme, part, x).kappa, c);
}

AreaIntensity estimate_a_and_c(const CellStats& stats) {
  AreaIntensity out;
  double acc = 0.0;
  for (double v : stats.corrected) acc += v;
  out.a_hat = acc * stats.cell_measure();
  if (!(out.a_hat > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.c_hat = static_cast<double>(stats.total()) / (stats.n * out.a_hat);
  return out;
}

ConfidenceInterval confidence_interval(const CellStats& stats, const WeightRow& row, double gamma) {
  check_alignment(stats, row.kappa.size());
  const double z = two_sided_z(gamma);
  const std::uint64_t total = stats.total();
  if (total == 0) throw DegenerateSampleError("confidence interval needs N(S) > 0");
  const double shift = z * row.kappa_norm / static_cast<double>(total);
  const double nu = stats.cell_measure();
  ConfidenceInterval ci;
  for (std::size_t r = 0; r < row.kappa.size(); ++r) {
    ci.lo += nu * (row.kappa[r] - shift) * stats.corrected[r];
    ci.hi += nu * (row.kappa[r] + shift) * stats.corrected[r];
  }
  return ci;
}

ConfidenceInterval confidence_interval(const CellStats& stats, const WeightScheme& scheme, const Partition& part,
                                       std::span<const double> x, double gamma) {
  check_alignment(stats, part.size());
  return confidence_interval(stats, weight_row(scheme, part, x), gamma);
}

std::vector<EstimateResult> estimate_points(const CellStats& stats, const WeightScheme& scheme,
                                            const Partition& part, const std::vector<std::vector<double>>& points,
                                            EstimatorVariant variant, double gamma, IntensityMode c_mode) {
  check_alignment(stats, part.size());
  const AreaIntensity ac = estimate_a_and_c(stats);
  const bool empty = stats.total() == 0 || ac.degenerate;
  double c_used = stats.c;
  if (c_mode == IntensityMode::Estimated) c_used = empty ? kNaN : ac.c_hat;
  const WeightScheme effective =
      variant == EstimatorVariant::Simplified ? with_mode(scheme, WeightMode::Midpoint) : scheme;

  std::vector<EstimateResult> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    const WeightRow row = weight_row(effective, part, x);
    EstimateResult res;
    res.x = x;
    res.variant = variant;
    res.kappa_norm = row.kappa_norm;
    res.a_hat = ac.a_hat;
    res.c_used = c_used;
    if (variant == EstimatorVariant::CountBased) {
      res.fhat = empty && c_mode == IntensityMode::Estimated ? 0.0 : count_estimate(stats, row.kappa, c_used);
      res.se_hat = empty ? kNaN : row.kappa_norm / (stats.n * ac.c_hat);
      res.ci_lo = kNaN;
      res.ci_hi = kNaN;
    } else {
      res.fhat = smoothed_estimate(stats, row.kappa);
      if (empty) {
        res.se_hat = kNaN;
        res.ci_lo = kNaN;
        res.ci_hi = kNaN;
      } else {
        res.se_hat = row.kappa_norm / (stats.n * ac.c_hat);
        const ConfidenceInterval ci = confidence_interval(stats, row, gamma);
        res.ci_lo = ci.lo;
        res.ci_hi = ci.hi;
      }
    }
    out.push_back(std::move(res));
  }
  return out;
}

void write_estimates_csv(std::ostream& os, const std::vector<EstimateResult>& results) {
  const auto old = os.precision(17);
  os << "x,fhat,se_hat,ci_lo,ci_hi,variant\n";
  for (const auto& r : results) {
    for (std::size_t j = 0; j < r.x.size(); ++j) os << (j ? " " : "") << r.x[j];
    os << ',' << r.fhat << ',' << r.se_hat << ',' << r.ci_lo << ',' << r.ci_hi << ',' << to_string(r.variant) << '\n';
  }
  os.precision(old);
}

}  // namespace ppbound
