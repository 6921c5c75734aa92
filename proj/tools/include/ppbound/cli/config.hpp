#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ppbound/mc.hpp"
#include "ppbound/model.hpp"
#include "ppbound/weights.hpp"

namespace ppbound::cli {

enum class ExperimentKind {
  Simulate,
  Estimate,
  Diagnose,
  Clt,
  Coverage,
  Rate,
  ChatConsistency,
  OracleValidate,
  DiagnoseArray,
};

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for an unknown name.
ExperimentKind parse_experiment_kind(std::string_view name);

/// Pass/fail bounds used for exit status 2. Defaults are the pre-registered
/// acceptance thresholds.
struct AcceptanceThresholds {
  double ks_max = 0.08;
  double correlation_max = 0.1;
  double ks_degradation_max = 0.03;
  double coverage_lo = 0.91;
  double coverage_hi = 0.98;
  /// Target log-log slope; when unset it is -alpha / (alpha + d) for Parzen
  /// and -1/2 otherwise.
  std::optional<double> slope_target;
  double slope_tolerance = 0.15;
  double chat_median_max = 0.02;
  double oracle_se_multiple = 4.0;
  double oracle_ks_max = 0.01;
  /// E((Z-/N-)^l) <= l! + this many standard errors.
  double moment_bound_se_multiple = 3.0;
};

struct OracleSettings {
  std::vector<double> lambdas{2.0, 5.0, 20.0};
  std::size_t draws = 100000;
  std::size_t cells = 20;
};

struct ArraySettings {
  /// Empty means the p unit vectors plus the all-ones direction.
  std::vector<std::vector<double>> directions;
  /// p x p row-major; empty means the identity.
  std::vector<double> sigma;
  std::vector<double> alphas{1.0, 2.0, 4.0};
  double max_norm_tolerance = 0.25;
  /// Standardized Z- draws per cell for the moment and tail proxies; 0 skips them.
  std::size_t sample_draws = 0;
};

/// A fully defaulted, validated run description.
struct RunConfig {
  ExperimentKind kind = ExperimentKind::Clt;
  BoundaryKind boundary = Constant{1.0};
  std::size_t dim = 1;
  WeightScheme scheme = Indicator{};
  std::vector<double> n{1000.0};
  /// "default" selects the scheme's default rule.
  bool k_default = false;
  ScheduleRule k = ScheduleRule::constant(10.0);
  bool smoothing_default = false;
  std::optional<ScheduleRule> smoothing;
  double c = 1.0;
  double gamma = 0.95;
  std::vector<std::vector<double>> probes{{0.5}};
  std::size_t replicates = 500;
  Seed seed = 12345;
  IntensityMode c_mode = IntensityMode::Known;
  EstimatorVariant variant = EstimatorVariant::Smoothed;
  double max_failure_fraction = 0.05;
  DiagnosticTolerances tolerances;
  AcceptanceThresholds acceptance;
  OracleSettings oracle;
  ArraySettings array;
  /// Optional point CSV (`replicate,x1..xd,y`) used by `estimate` instead of simulating.
  std::optional<std::string> points_file;
  std::string out = "out";
};

/// Parses and validates a config document. Unknown keys, wrong types and
/// out-of-range values throw ConfigError naming the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical form with every default filled in; parse_config(emit_config(c))
/// reproduces c.
nlohmann::json emit_config(const RunConfig& config);

/// Builds the Monte Carlo plan the config describes (threads = 1).
ExperimentPlan make_plan(const RunConfig& config);

/// 64-bit FNV-1a of the canonical config, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace ppbound::cli
