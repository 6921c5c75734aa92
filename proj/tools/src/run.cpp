#include "ppbound/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ppbound/cells.hpp"
#include "ppbound/errors.hpp"
#include "ppbound/estimate.hpp"
#include "ppbound/simulate.hpp"

#ifndef PPBOUND_VERSION_STRING
#define PPBOUND_VERSION_STRING "0.0.0"
#endif

namespace ppbound::cli {

using nlohmann::json;
using CsvFiles = std::vector<std::pair<std::string, std::string>>;

namespace {

AcceptanceCheck within(std::string name, double value, double lo, double hi) {
  return AcceptanceCheck{std::move(name), value, lo, hi, value >= lo && value <= hi};
}

AcceptanceCheck at_most(std::string name, double value, double hi) {
  return within(std::move(name), value, -INFINITY, hi);
}

std::string probe_label(const std::vector<double>& x) {
  std::string s;
  for (std::size_t j = 0; j < x.size(); ++j) s += (j ? " " : "") + format_number(x[j]);
  return s;
}

void add_validity_check(const McReport& rep, const RunConfig& cfg, std::vector<AcceptanceCheck>& checks) {
  const double total = static_cast<double>(rep.replicates) *
                       (rep.rate.empty() ? 1.0 : static_cast<double>(rep.rate.size()));
  checks.push_back(at_most("failure_fraction", total > 0 ? static_cast<double>(rep.failed) / total : 0.0,
                           cfg.max_failure_fraction));
}

void emit_z_csv(const McReport& rep, IntensityMode mode, CsvFiles& csv) {
  std::ostringstream z;
  z << "probe,replicate,z\n";
  for (std::size_t i = 0; i < rep.probes.size(); ++i) {
    const auto& ps = rep.probes[i];
    const auto& series = ps.z(mode);
    for (std::size_t j = 0; j < series.size(); ++j) {
      z << i << ',' << ps.replicate_ids[j] << ',' << format_number(series[j]) << '\n';
    }
  }
  csv.emplace_back("z.csv", z.str());
  for (std::size_t i = 0; i < rep.probes.size(); ++i) {
    const auto& series = rep.probes[i].z(mode);
    if (series.empty()) continue;
    std::ostringstream qq;
    qq << "theoretical_q,empirical_q\n";
    for (const auto& [t, e] : normal_qq(series)) qq << format_number(t) << ',' << format_number(e) << '\n';
    csv.emplace_back("qq_probe" + std::to_string(i) + ".csv", qq.str());
  }
}

void emit_points(const ProcessSample& sample, std::ostringstream& os, bool header) {
  if (header) write_points_csv_header(os, sample.dim);
  write_points_csv(os, sample);
}

json run_simulate(const RunConfig& cfg, const ExperimentPlan& plan, const RunOptions& opt, CsvFiles& csv) {
  const double n = cfg.n.front();
  std::ostringstream totals;
  std::ostringstream points;
  totals << "replicate,total\n";
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    const ProcessSample s = sample_process(plan.spec, n, cfg.c, replicate_seed(cfg.seed, 0, r), r);
    const double t = static_cast<double>(s.total());
    sum += t;
    sum_sq += t * t;
    totals << r << ',' << s.total() << '\n';
    if (opt.dump_points) emit_points(s, points, r == 0);
  }
  const double R = static_cast<double>(cfg.replicates);
  const double mean = sum / R;
  const double var = cfg.replicates > 1 ? (sum_sq - R * mean * mean) / (R - 1.0) : NAN;
  csv.emplace_back("totals.csv", totals.str());
  if (opt.dump_points) csv.emplace_back("points.csv", points.str());
  return json{{"n", n},
              {"replicates", cfg.replicates},
              {"expected_total", n * cfg.c * plan.spec.integral()},
              {"mean_total", mean},
              {"variance_total", var}};
}

json run_estimate(const RunConfig& cfg, const ExperimentPlan& plan, const RunOptions& opt, CsvFiles& csv) {
  const ResolvedDesign design = resolve_design(plan, cfg.n.front());
  const Partition part(design.k, cfg.dim);
  const ProcessSample sample = cfg.points_file
                                   ? read_points_csv(*cfg.points_file, cfg.dim, design.n, cfg.c)
                                   : sample_process(plan.spec, design.n, cfg.c, replicate_seed(cfg.seed, 0, 0), 0);
  if (opt.dump_points) {
    std::ostringstream points;
    emit_points(sample, points, true);
    csv.emplace_back("points.csv", points.str());
  }
  const CellStats stats = reduce_cells(sample, part);
  const AreaIntensity ac = estimate_a_and_c(stats);
  const auto results = estimate_points(stats, design.scheme, part, cfg.probes, cfg.variant, cfg.gamma, cfg.c_mode);
  std::ostringstream est;
  write_estimates_csv(est, results);
  csv.emplace_back("estimates.csv", est.str());

  json points = json::array();
  for (const auto& r : results) {
    points.push_back(json{{"x", r.x},
                          {"fhat", r.fhat},
                          {"f_true", plan.spec.value(r.x)},
                          {"kappa_norm", r.kappa_norm},
                          {"se_hat", r.se_hat},
                          {"ci_lo", r.ci_lo},
                          {"ci_hi", r.ci_hi}});
  }
  return json{{"n", design.n},
              {"k", design.k},
              {"scheme", scheme_tag(design.scheme)},
              {"smoothing", design.smoothing},
              {"source", cfg.points_file ? "file" : "simulated"},
              {"total", stats.total()},
              {"a_hat", ac.a_hat},
              {"c_hat", ac.c_hat},
              {"degenerate", ac.degenerate},
              {"variant", to_string(cfg.variant)},
              {"estimates", std::move(points)}};
}

json run_diagnose(const RunConfig& cfg, const ExperimentPlan& plan) {
  const ResolvedDesign design = resolve_design(plan, cfg.n.front());
  const Partition part(design.k, cfg.dim);
  const CellProfile profile = profile_cells(plan.spec, part);
  json doc = to_json(diagnose(design.scheme, part, plan.spec, profile, design.n, cfg.c, cfg.probes, cfg.tolerances));
  doc["design"] = json{{"n", design.n}, {"k", design.k}, {"scheme", scheme_tag(design.scheme)},
                       {"smoothing", design.smoothing}};
  return doc;
}

json run_diagnose_array(const RunConfig& cfg, const ExperimentPlan& plan) {
  const ResolvedDesign design = resolve_design(plan, cfg.n.front());
  const Partition part(design.k, cfg.dim);
  std::vector<WeightRow> rows;
  for (const auto& x : cfg.probes) rows.push_back(weight_row(design.scheme, part, x));

  ArrayCheckInput in;
  in.weights = weight_array_from_rows(rows);
  const std::size_t p = cfg.probes.size();
  in.directions = cfg.array.directions;
  if (in.directions.empty()) {
    for (std::size_t i = 0; i < p; ++i) {
      std::vector<double> e(p, 0.0);
      e[i] = 1.0;
      in.directions.push_back(std::move(e));
    }
    if (p > 1) in.directions.emplace_back(p, 1.0);
  }
  if (cfg.array.sigma.empty()) {
    std::vector<double> id(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) id[i * p + i] = 1.0;
    in.sigma = id;
  } else {
    if (cfg.array.sigma.size() != p * p) throw ConfigError("config key 'array.sigma': expected p x p entries");
    in.sigma = cfg.array.sigma;
  }
  in.alphas = cfg.array.alphas;
  in.max_norm_tolerance = cfg.array.max_norm_tolerance;
  if (cfg.array.sample_draws > 0) {
    const CellProfile profile = profile_cells(plan.spec, part);
    in.samples.resize(design.k);
    for (std::size_t r = 0; r < design.k; ++r) {
      const CellLaw law{design.n * cfg.c * part.cell_measure() * profile.inf[r]};
      const ZMinusMoments mom = zminus_moments(law);
      const double sd = std::sqrt(mom.variance);
      Rng rng(derive_replicate_seed(cfg.seed, r));
      auto& zeta = in.samples[r];
      zeta.reserve(cfg.array.sample_draws);
      for (std::size_t i = 0; i < cfg.array.sample_draws; ++i) {
        zeta.push_back((draw_zminus(law, rng).z - mom.mean) / sd);
      }
    }
  }
  json doc = to_json(check_array(in));
  doc["design"] = json{{"n", design.n}, {"k", design.k}, {"scheme", scheme_tag(design.scheme)},
                       {"smoothing", design.smoothing}};
  doc["directions"] = in.directions;
  return doc;
}

json run_mc(const RunConfig& cfg, ExperimentPlan plan, const RunOptions& opt, CsvFiles& csv,
            std::vector<AcceptanceCheck>& checks) {
  plan.threads = opt.threads;
  const auto& acc = cfg.acceptance;
  McReport rep;
  switch (cfg.kind) {
    case ExperimentKind::Clt: rep = run_clt(plan); break;
    case ExperimentKind::Coverage: rep = run_coverage(plan); break;
    case ExperimentKind::Rate: rep = run_rate(plan); break;
    default: rep = run_chat_consistency(plan); break;
  }

  if (opt.dump_points) {
    const ResolvedDesign d = resolve_design(plan, plan.n_schedule.front());
    std::ostringstream points;
    emit_points(sample_process(plan.spec, d.n, plan.c, replicate_seed(plan.seed, 0, 0), 0), points, true);
    csv.emplace_back("points.csv", points.str());
  }

  if (cfg.kind != ExperimentKind::ChatConsistency) emit_z_csv(rep, plan.c_mode, csv);
  add_validity_check(rep, cfg, checks);

  const std::size_t p = rep.probes.size();
  if (cfg.kind == ExperimentKind::Clt) {
    for (std::size_t i = 0; i < p; ++i) {
      const auto& ps = rep.probes[i];
      const std::string label = "probe " + probe_label(ps.point);
      checks.push_back(at_most("ks " + label, ps.ks(plan.c_mode), acc.ks_max));
      checks.push_back(at_most("ks degradation " + label, std::fabs(ps.ks_estimated - ps.ks_known),
                               acc.ks_degradation_max));
    }
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        checks.push_back(at_most("|correlation| " + std::to_string(i) + "," + std::to_string(j),
                                 std::fabs(rep.correlation[i * p + j]), acc.correlation_max));
      }
    }
  } else if (cfg.kind == ExperimentKind::Coverage) {
    checks.push_back(within("coverage", rep.coverage, acc.coverage_lo, acc.coverage_hi));
  } else if (cfg.kind == ExperimentKind::Rate) {
    std::ostringstream rate;
    rate << "n,rmse\n";
    for (const auto& rp : rep.rate) rate << format_number(rp.n) << ',' << format_number(rp.rmse) << '\n';
    csv.emplace_back("rate.csv", rate.str());
    double target = -0.5;
    if (acc.slope_target) {
      target = *acc.slope_target;
    } else if (std::holds_alternative<Parzen>(cfg.scheme)) {
      const double alpha = plan.spec.holder_exponent();
      target = -alpha / (alpha + static_cast<double>(cfg.dim));
    }
    checks.push_back(within("slope", rep.slope, target - acc.slope_tolerance, target + acc.slope_tolerance));
  } else {
    std::ostringstream chat;
    chat << "n,median_abs_error,q99_abs_error\n";
    for (const auto& cp : rep.chat) {
      chat << format_number(cp.n) << ',' << format_number(cp.median_abs_error) << ','
           << format_number(cp.q99_abs_error) << '\n';
    }
    csv.emplace_back("chat.csv", chat.str());
    checks.push_back(at_most("median |c_hat - c| at largest n", rep.chat.back().median_abs_error,
                             acc.chat_median_max));
    if (rep.chat.size() >= 2) {
      checks.push_back(within("medians strictly decreasing", rep.chat_strictly_decreasing ? 1.0 : 0.0, 1.0, 1.0));
    }
  }
  return to_json(rep);
}

json run_oracle(const RunConfig& cfg, const RunOptions& opt, std::vector<AcceptanceCheck>& checks) {
  OraclePlan op;
  op.lambdas = cfg.oracle.lambdas;
  op.draws = cfg.oracle.draws;
  op.cells = cfg.oracle.cells;
  op.seed = cfg.seed;
  op.threads = opt.threads;
  const auto results = run_oracle_validation(op);
  const auto& acc = cfg.acceptance;
  json out = json::array();
  for (const auto& o : results) {
    const std::string tag = "lambda " + format_number(o.lambda) + " ";
    const double m = acc.oracle_se_multiple;
    checks.push_back(within(tag + "mean", o.mean, o.closed_form.mean - m * o.mean_se, o.closed_form.mean + m * o.mean_se));
    checks.push_back(within(tag + "variance", o.variance, o.closed_form.variance - m * o.variance_se,
                            o.closed_form.variance + m * o.variance_se));
    checks.push_back(within(tag + "ratio_mean", o.ratio_mean, o.closed_form.ratio_mean - m * o.ratio_se,
                            o.closed_form.ratio_mean + m * o.ratio_se));
    checks.push_back(at_most(tag + "ks", o.ks, acc.oracle_ks_max));
    double factorial = 1.0;
    for (std::size_t l = 1; l <= o.ratio_moments.size(); ++l) {
      factorial *= static_cast<double>(l);
      checks.push_back(at_most(tag + "E(ratio^" + std::to_string(l) + ")", o.ratio_moments[l - 1],
                               factorial + acc.moment_bound_se_multiple * o.ratio_moment_se[l - 1]));
    }
    out.push_back(to_json(o));
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::string version() { return PPBOUND_VERSION_STRING; }

RunResult execute(const RunConfig& cfg, const RunOptions& opt, CsvFiles& csv) {
  RunResult res;
  json results;
  const bool has_plan = cfg.kind != ExperimentKind::OracleValidate;
  const ExperimentPlan plan = has_plan ? make_plan(cfg) : ExperimentPlan{};
  switch (cfg.kind) {
    case ExperimentKind::Simulate: results = run_simulate(cfg, plan, opt, csv); break;
    case ExperimentKind::Estimate: results = run_estimate(cfg, plan, opt, csv); break;
    case ExperimentKind::Diagnose: results = run_diagnose(cfg, plan); break;
    case ExperimentKind::DiagnoseArray: results = run_diagnose_array(cfg, plan); break;
    case ExperimentKind::OracleValidate: results = run_oracle(cfg, opt, res.checks); break;
    default: results = run_mc(cfg, plan, opt, csv, res.checks); break;
  }
  bool passed = true;
  json checks = json::array();
  for (const auto& c : res.checks) {
    passed = passed && c.passed;
    checks.push_back(to_json(c));
  }
  res.report = json{{"experiment", to_string(cfg.kind)},
                    {"version", version()},
                    {"config", emit_config(cfg)},
                    {"results", std::move(results)},
                    {"acceptance", {{"checks", std::move(checks)}, {"passed", passed}}}};
  res.exit_code = passed ? kExitOk : kExitAcceptanceFailed;
  return res;
}

RunResult run(const RunConfig& cfg, const RunOptions& opt) {
  CsvFiles csv;
  RunResult res = execute(cfg, opt, csv);
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", res.report.dump(2) + "\n");
  res.files.push_back("report.json");
  for (const auto& [name, contents] : csv) {
    write_file(dir / name, contents);
    res.files.push_back(name);
  }
  const json manifest{{"experiment", to_string(cfg.kind)},
                      {"seed", cfg.seed},
                      {"config_hash", config_hash(cfg)},
                      {"version", version()},
                      {"timestamp", utc_timestamp()},
                      {"files", res.files}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  res.files.push_back("manifest.json");
  return res;
}

ProcessSample read_points_csv(const std::string& path, std::size_t dim, double n, double c) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read point file '" + path + "'");
  ProcessSample s;
  s.dim = dim;
  s.n = n;
  s.c = c;
  std::string line;
  std::size_t line_no = 0;
  bool have_id = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
    }
    if (fields.size() != dim + 2) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim + 2) + " fields");
    }
    const auto id = static_cast<std::uint64_t>(fields[0]);
    if (!have_id) {
      s.replicate_id = id;
      have_id = true;
    } else if (id != s.replicate_id) {
      throw DataError(path + ":" + std::to_string(line_no) + ": file holds more than one replicate");
    }
    const double y = fields.back();
    if (!(y >= 0.0) || !std::isfinite(y)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": ordinate must be finite and non-negative");
    }
    s.xs.insert(s.xs.end(), fields.begin() + 1, fields.end() - 1);
    s.ys.push_back(y);
  }
  return s;
}

}  // namespace ppbound::cli
