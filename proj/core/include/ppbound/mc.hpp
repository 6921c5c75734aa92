#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppbound/estimate.hpp"
#include "ppbound/model.hpp"
#include "ppbound/rng.hpp"
#include "ppbound/theory.hpp"
#include "ppbound/weights.hpp"

namespace ppbound {

/// u_n, the slowly diverging factor in the default schedules:
/// log(log(max(n, 16))).
double default_slow_factor(double n) noexcept;

/// value(n) = coef * n^exponent * log(n)^log_power * u_n^u_power, or a fixed
/// value when `fixed` is set.
struct ScheduleRule {
  std::optional<double> fixed;
  double coef = 1.0;
  double exponent = 0.0;
  double log_power = 0.0;
  double u_power = 0.0;

  static ScheduleRule constant(double v) {
    ScheduleRule r;
    r.fixed = v;
    return r;
  }
  double evaluate(double n) const noexcept;
};

/// h_n = n^{-1/(alpha+d)}, k_n = n^{d/(alpha+d)} u_n^2.
void default_parzen_rules(double alpha, std::size_t dim, ScheduleRule& k_rule, ScheduleRule& h_rule);
/// b_n = n^{1/2}, k_n = n^{1/2} log(n) u_n^2.
void default_dirichlet_rules(ScheduleRule& k_rule, ScheduleRule& b_rule);

struct ExperimentPlan {
  BoundarySpec spec{Constant{1.0}};
  /// Template scheme; its bandwidth / order is replaced per n by the
  /// smoothing rule when one is set.
  WeightScheme scheme = Indicator{};
  std::vector<std::vector<double>> probes;
  std::vector<double> n_schedule{1000.0};
  /// Cell count rule; rounded up to the next admissible k.
  ScheduleRule k_rule = ScheduleRule::constant(10.0);
  /// Parzen bandwidth or Dirichlet order per n (order rounded up to even).
  std::optional<ScheduleRule> smoothing_rule;
  double c = 1.0;
  double gamma = 0.95;
  std::size_t replicates = 500;
  Seed seed = 12345;
  IntensityMode c_mode = IntensityMode::Known;
  EstimatorVariant variant = EstimatorVariant::Smoothed;
  /// Failed replicates are excluded; the report is invalid above this fraction.
  double max_failure_fraction = 0.05;
  /// Worker count. Affects wall time only.
  std::size_t threads = 1;
};

/// Throws ConfigError for empty / non-interior / duplicate probes, schedules
/// that are not positive and increasing, or R == 0.
void validate_plan(const ExperimentPlan& plan);

/// Concrete (k, scheme) used at one n.
struct ResolvedDesign {
  double n = 0.0;
  std::size_t k = 0;
  WeightScheme scheme;
  /// Bandwidth h or order b actually used (0 for Indicator).
  double smoothing = 0.0;
};
ResolvedDesign resolve_design(const ExperimentPlan& plan, double n);

/// Seed of replicate `id` at schedule position `stage`.
Seed replicate_seed(Seed master, std::size_t stage, std::uint64_t id) noexcept;

/// Everything one replicate contributes, before aggregation.
struct ReplicateOutcome {
  std::uint64_t id = 0;
  bool ok = true;
  std::uint64_t total = 0;
  double a_hat = 0.0;
  double c_hat = 0.0;
  std::vector<double> fhat;  // per probe
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
};

/// Runs plan.replicates independent replicates at one design. Results are
/// ordered by replicate id and identical for any thread count.
std::vector<ReplicateOutcome> run_replicates(const ExperimentPlan& plan, const ResolvedDesign& design,
                                             std::size_t stage);

struct ProbeSummary {
  std::vector<double> point;
  double f_true = 0.0;
  double kappa_norm = 0.0;
  /// kappa_n(x) / (k^{1/2} ||K_n(x, .)||_2); NaN for Indicator.
  double kernel_ratio = 0.0;
  std::vector<std::uint64_t> replicate_ids;
  std::vector<double> z_known;      // (n c / kappa_n)(f_hat - f)
  std::vector<double> z_estimated;  // (n c_hat / kappa_n)(f_hat - f)
  double ks_known = 0.0;
  double ks_estimated = 0.0;
  bool ks_defined = false;
  double mean = 0.0;      // of the plan's primary z series
  double variance = 0.0;
  double coverage = 0.0;  // fraction of intervals containing f(x)
  double rmse = 0.0;      // of f_hat - f
  double bias = 0.0;

  const std::vector<double>& z(IntensityMode m) const { return m == IntensityMode::Known ? z_known : z_estimated; }
  double ks(IntensityMode m) const { return m == IntensityMode::Known ? ks_known : ks_estimated; }
};

struct RatePoint {
  double n = 0.0;
  std::size_t k = 0;
  double smoothing = 0.0;
  double rmse = 0.0;
  std::vector<double> probe_rmse;
};

struct ChatPoint {
  double n = 0.0;
  std::size_t k = 0;
  double median_abs_error = 0.0;
  double q99_abs_error = 0.0;
  std::size_t degenerate = 0;
  std::vector<double> ratios;  // c_hat / c per valid replicate
};

struct McReport {
  std::string experiment;
  IntensityMode c_mode = IntensityMode::Known;
  std::size_t replicates = 0;
  std::size_t failed = 0;
  bool valid = true;
  ResolvedDesign design;
  std::vector<ProbeSummary> probes;
  std::vector<double> correlation;  // p x p, primary z series
  double coverage = 0.0;            // pooled over probes
  std::vector<RatePoint> rate;
  double slope = 0.0;
  double slope_half_width = 0.0;
  std::vector<ChatPoint> chat;
  bool chat_strictly_decreasing = false;
};

McReport run_clt(const ExperimentPlan& plan);
McReport run_coverage(const ExperimentPlan& plan);
McReport run_rate(const ExperimentPlan& plan);
McReport run_chat_consistency(const ExperimentPlan& plan);

/// sup_t |F_m(t) - F(t)| over the sorted sample, evaluating both one-sided
/// gaps at every distinct sample value. `left_cdf` gives F(t-) for laws with
/// atoms; it defaults to `cdf`. Throws DataError for an empty sample.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf,
                    const std::function<double(double)>& left_cdf = {});

/// Pearson correlation; NaN when either series is constant.
double sample_correlation(std::span<const double> a, std::span<const double> b);

/// Type-7 (linear interpolation) quantile of an unsorted sample.
double sample_quantile(std::vector<double> values, double prob);

/// Ordinary least squares y = a + b x. Half-width is the 95% Student-t
/// interval on b (NaN with fewer than three points).
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_half_width = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Normal QQ pairs (theoretical, empirical) with plotting positions (i - 0.5) / m.
std::vector<std::pair<double, double>> normal_qq(std::vector<double> sample);

// ---------------------------------------------------------------------------
// Flat-cell oracle experiment: Z- draws taken from the full pipeline
// (Constant{1} boundary, c = 1, n = lambda * cells) and compared with the
// closed-form law.

struct OraclePlan {
  std::vector<double> lambdas{2.0, 5.0, 20.0};
  std::size_t draws = 100000;
  std::size_t cells = 20;
  Seed seed = 12345;
  std::size_t threads = 1;
};

struct OracleResult {
  double lambda = 0.0;
  std::size_t draws = 0;
  ZMinusMoments closed_form;
  double mean = 0.0;
  double variance = 0.0;
  double ratio_mean = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  double ratio_se = 0.0;
  double ks = 0.0;
  /// Sampled E((Z-/N-)^l) and its standard error, l = 1, 2, 3.
  std::vector<double> ratio_moments;
  std::vector<double> ratio_moment_se;
};

std::vector<OracleResult> run_oracle_validation(const OraclePlan& plan);

/// Cell draws (Z-, N-) of one flat-boundary pipeline replicate.
std::vector<ZMinusDraw> flat_cell_draws(double lambda, std::size_t cells, Seed seed);

}  // namespace ppbound
