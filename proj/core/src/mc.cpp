#include "ppbound/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "ppbound/cells.hpp"
#include "ppbound/errors.hpp"
#include "ppbound/normal.hpp"
#include "ppbound/simulate.hpp"

namespace ppbound {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, count). Each index is handled exactly once; callers
// write results by index so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(count);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  if (v.size() < 2) return kNaN;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

Partition partition_for(const ExperimentPlan& plan, const ResolvedDesign& design) {
  return Partition(design.k, plan.spec.dim());
}

// Aggregates one stage of replicates into per-probe summaries.
McReport summarize(const ExperimentPlan& plan, const ResolvedDesign& design,
                   const std::vector<ReplicateOutcome>& outcomes, std::string experiment) {
  McReport rep;
  rep.experiment = std::move(experiment);
  rep.c_mode = plan.c_mode;
  rep.replicates = outcomes.size();
  rep.design = design;
  rep.failed = static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const ReplicateOutcome& o) { return !o.ok; }));
  rep.valid = static_cast<double>(rep.failed) <= plan.max_failure_fraction * static_cast<double>(rep.replicates);

  const Partition part = partition_for(plan, design);
  const WeightScheme effective =
      plan.variant == EstimatorVariant::Simplified ? with_mode(design.scheme, WeightMode::Midpoint) : design.scheme;
  const std::size_t p = plan.probes.size();
  rep.probes.resize(p);

  std::size_t covered_total = 0;
  std::size_t counted_total = 0;
  for (std::size_t i = 0; i < p; ++i) {
    ProbeSummary& ps = rep.probes[i];
    ps.point = plan.probes[i];
    ps.f_true = plan.spec.value(ps.point);
    try {
      ps.kappa_norm = weight_row(effective, part, ps.point).kappa_norm;
    } catch (const DegenerateWeightsError&) {
      ps.kappa_norm = 0.0;
    }
    ps.kernel_ratio = kNaN;
    if (!std::holds_alternative<Indicator>(effective) && ps.kappa_norm > 0.0) {
      const KernelNorms kn = kernel_norms(effective, part, ps.point);
      ps.kernel_ratio = ps.kappa_norm / (std::sqrt(static_cast<double>(design.k)) * kn.l2);
    }

    std::vector<double> err;
    std::size_t covered = 0;
    for (const auto& o : outcomes) {
      if (!o.ok || !(ps.kappa_norm > 0.0)) continue;
      const double e = o.fhat[i] - ps.f_true;
      err.push_back(e);
      ps.replicate_ids.push_back(o.id);
      ps.z_known.push_back(design.n * plan.c / ps.kappa_norm * e);
      ps.z_estimated.push_back(design.n * o.c_hat / ps.kappa_norm * e);
      if (o.ci_lo[i] <= ps.f_true && ps.f_true <= o.ci_hi[i]) ++covered;
    }
    const std::size_t m = err.size();
    ps.ks_defined = m >= 2;
    if (m >= 1) {
      ps.ks_known = ks_statistic(ps.z_known, normal_cdf);
      ps.ks_estimated = ks_statistic(ps.z_estimated, normal_cdf);
      const auto& z = ps.z(plan.c_mode);
      ps.mean = mean_of(z);
      ps.variance = variance_of(z);
      ps.coverage = static_cast<double>(covered) / static_cast<double>(m);
      double ss = 0.0;
      for (double e : err) ss += e * e;
      ps.rmse = std::sqrt(ss / static_cast<double>(m));
      ps.bias = mean_of(err);
    } else {
      ps.ks_known = ps.ks_estimated = ps.mean = ps.variance = ps.coverage = ps.rmse = ps.bias = kNaN;
    }
    covered_total += covered;
    counted_total += m;
  }
  rep.coverage = counted_total ? static_cast<double>(covered_total) / static_cast<double>(counted_total) : kNaN;

  rep.correlation.assign(p * p, kNaN);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto& a = rep.probes[i].z(plan.c_mode);
      const auto& b = rep.probes[j].z(plan.c_mode);
      if (a.size() == b.size() && a.size() >= 2) rep.correlation[i * p + j] = sample_correlation(a, b);
    }
  }
  return rep;
}

}  // namespace

double default_slow_factor(double n) noexcept { return std::log(std::log(std::max(n, 16.0))); }

double ScheduleRule::evaluate(double n) const noexcept {
  if (fixed) return *fixed;
  double v = coef * std::pow(n, exponent);
  if (log_power != 0.0) v *= std::pow(std::log(n), log_power);
  if (u_power != 0.0) v *= std::pow(default_slow_factor(n), u_power);
  return v;
}

void default_parzen_rules(double alpha, std::size_t dim, ScheduleRule& k_rule, ScheduleRule& h_rule) {
  const double d = static_cast<double>(dim);
  k_rule = ScheduleRule{};
  k_rule.exponent = d / (alpha + d);
  k_rule.u_power = 2.0;
  h_rule = ScheduleRule{};
  h_rule.exponent = -1.0 / (alpha + d);
}

void default_dirichlet_rules(ScheduleRule& k_rule, ScheduleRule& b_rule) {
  k_rule = ScheduleRule{};
  k_rule.exponent = 0.5;
  k_rule.log_power = 1.0;
  k_rule.u_power = 2.0;
  b_rule = ScheduleRule{};
  b_rule.exponent = 0.5;
}

void validate_plan(const ExperimentPlan& plan) {
  const std::size_t d = plan.spec.dim();
  validate_scheme(plan.scheme, d);
  if (plan.probes.empty()) throw ConfigError("experiment needs at least one probe point");
  std::set<std::vector<double>> seen;
  for (const auto& x : plan.probes) {
    if (x.size() != d) throw ConfigError("probe dimension does not match the boundary");
    for (double v : x) {
      if (!(v > 0.0 && v < 1.0)) throw ConfigError("probe points must lie in the open unit cube");
    }
    if (!seen.insert(x).second) throw ConfigError("probe points must be pairwise distinct");
  }
  if (plan.n_schedule.empty()) throw ConfigError("n schedule is empty");
  for (std::size_t i = 0; i < plan.n_schedule.size(); ++i) {
    const double n = plan.n_schedule[i];
    if (!(n >= 1.0) || !std::isfinite(n)) throw ConfigError("schedule values of n must be >= 1");
    if (i > 0 && !(n > plan.n_schedule[i - 1])) throw ConfigError("n schedule must be strictly increasing");
  }
  if (plan.replicates == 0) throw ConfigError("replicate count must be positive");
  if (!(plan.c > 0.0) || !std::isfinite(plan.c)) throw ConfigError("intensity constant c must be positive");
  if (!(plan.gamma >= 0.0 && plan.gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  for (double n : plan.n_schedule) {
    if (!(plan.k_rule.evaluate(n) > 0.0)) throw ConfigError("cell-count rule must be positive");
    if (plan.smoothing_rule && !(plan.smoothing_rule->evaluate(n) > 0.0)) {
      throw ConfigError("smoothing rule must be positive");
    }
  }
}

ResolvedDesign resolve_design(const ExperimentPlan& plan, double n) {
  ResolvedDesign out;
  out.n = n;
  out.k = next_admissible_k(plan.k_rule.evaluate(n), plan.spec.dim());
  out.scheme = plan.scheme;
  if (auto* p = std::get_if<Parzen>(&out.scheme)) {
    if (plan.smoothing_rule) p->bandwidth = plan.smoothing_rule->evaluate(n);
    out.smoothing = p->bandwidth;
  } else if (auto* dk = std::get_if<Dirichlet>(&out.scheme)) {
    if (plan.smoothing_rule) {
      auto b = static_cast<std::size_t>(std::ceil(plan.smoothing_rule->evaluate(n) - 1e-9));
      if (b % 2 != 0) ++b;
      dk->order = b;
    }
    out.smoothing = static_cast<double>(dk->order);
  }
  return out;
}

Seed replicate_seed(Seed master, std::size_t stage, std::uint64_t id) noexcept {
  const Seed base = stage == 0 ? master : derive_replicate_seed(master, ~static_cast<std::uint64_t>(stage));
  return derive_replicate_seed(base, id);
}

std::vector<ReplicateOutcome> run_replicates(const ExperimentPlan& plan, const ResolvedDesign& design,
                                             std::size_t stage) {
  const Partition part = partition_for(plan, design);
  const WeightScheme effective =
      plan.variant == EstimatorVariant::Simplified ? with_mode(design.scheme, WeightMode::Midpoint) : design.scheme;
  const std::size_t p = plan.probes.size();

  std::vector<WeightRow> rows(p);
  bool degenerate_weights = false;
  for (std::size_t i = 0; i < p; ++i) {
    try {
      rows[i] = weight_row(effective, part, plan.probes[i]);
    } catch (const DegenerateWeightsError&) {
      degenerate_weights = true;
    }
  }

  std::vector<ReplicateOutcome> out(plan.replicates);
  parallel_for(plan.replicates, plan.threads, [&](std::size_t idx) {
    ReplicateOutcome& o = out[idx];
    o.id = idx;
    o.fhat.assign(p, kNaN);
    o.ci_lo.assign(p, kNaN);
    o.ci_hi.assign(p, kNaN);
    const ProcessSample sample = sample_process(plan.spec, design.n, plan.c, replicate_seed(plan.seed, stage, idx), idx);
    const CellStats stats = reduce_cells(sample, part);
    const AreaIntensity ac = estimate_a_and_c(stats);
    o.total = stats.total();
    o.a_hat = ac.a_hat;
    o.c_hat = ac.c_hat;
    if (degenerate_weights || ac.degenerate || o.total == 0) {
      o.ok = false;
      return;
    }
    for (std::size_t i = 0; i < p; ++i) {
      if (plan.variant == EstimatorVariant::CountBased) {
        const double c_used = plan.c_mode == IntensityMode::Known ? plan.c : ac.c_hat;
        o.fhat[i] = count_estimate(stats, rows[i].kappa, c_used);
        const double half = two_sided_z(plan.gamma) * rows[i].kappa_norm / (stats.n * c_used);
        o.ci_lo[i] = o.fhat[i] - half;
        o.ci_hi[i] = o.fhat[i] + half;
      } else {
        o.fhat[i] = smoothed_estimate(stats, rows[i].kappa);
        const ConfidenceInterval ci = confidence_interval(stats, rows[i], plan.gamma);
        o.ci_lo[i] = ci.lo;
        o.ci_hi[i] = ci.hi;
      }
    }
  });
  return out;
}

McReport run_clt(const ExperimentPlan& plan) {
  validate_plan(plan);
  const ResolvedDesign design = resolve_design(plan, plan.n_schedule.front());
  return summarize(plan, design, run_replicates(plan, design, 0), "clt");
}

McReport run_coverage(const ExperimentPlan& plan) {
  validate_plan(plan);
  const ResolvedDesign design = resolve_design(plan, plan.n_schedule.front());
  return summarize(plan, design, run_replicates(plan, design, 0), "coverage");
}

McReport run_rate(const ExperimentPlan& plan) {
  validate_plan(plan);
  McReport rep;
  std::vector<double> log_n;
  std::vector<double> log_rmse;
  bool valid = true;
  std::size_t failed = 0;
  for (std::size_t s = 0; s < plan.n_schedule.size(); ++s) {
    const ResolvedDesign design = resolve_design(plan, plan.n_schedule[s]);
    McReport stage = summarize(plan, design, run_replicates(plan, design, s), "rate");
    RatePoint rp;
    rp.n = design.n;
    rp.k = design.k;
    rp.smoothing = design.smoothing;
    double mse = 0.0;
    for (const auto& ps : stage.probes) {
      rp.probe_rmse.push_back(ps.rmse);
      mse += ps.rmse * ps.rmse;
    }
    rp.rmse = std::sqrt(mse / static_cast<double>(stage.probes.size()));
    log_n.push_back(std::log(rp.n));
    log_rmse.push_back(std::log(rp.rmse));
    rep.rate.push_back(std::move(rp));
    valid = valid && stage.valid;
    failed += stage.failed;
    if (s + 1 == plan.n_schedule.size()) {
      rep.probes = std::move(stage.probes);
      rep.correlation = std::move(stage.correlation);
      rep.coverage = stage.coverage;
      rep.design = stage.design;
    }
  }
  rep.experiment = "rate";
  rep.c_mode = plan.c_mode;
  rep.replicates = plan.replicates;
  rep.failed = failed;
  rep.valid = valid;
  if (log_n.size() >= 2) {
    const LinearFit fit = fit_line(log_n, log_rmse);
    rep.slope = fit.slope;
    rep.slope_half_width = fit.slope_half_width;
  } else {
    rep.slope = rep.slope_half_width = kNaN;
  }
  return rep;
}

McReport run_chat_consistency(const ExperimentPlan& plan) {
  validate_plan(plan);
  McReport rep;
  rep.experiment = "chat-consistency";
  rep.c_mode = IntensityMode::Estimated;
  rep.replicates = plan.replicates;
  bool decreasing = true;
  for (std::size_t s = 0; s < plan.n_schedule.size(); ++s) {
    const ResolvedDesign design = resolve_design(plan, plan.n_schedule[s]);
    const auto outcomes = run_replicates(plan, design, s);
    ChatPoint cp;
    cp.n = design.n;
    cp.k = design.k;
    std::vector<double> errors;
    for (const auto& o : outcomes) {
      if (!(o.a_hat > 0.0)) {
        ++cp.degenerate;
        continue;
      }
      cp.ratios.push_back(o.c_hat / plan.c);
      errors.push_back(std::fabs(o.c_hat - plan.c));
    }
    cp.median_abs_error = errors.empty() ? kNaN : sample_quantile(errors, 0.5);
    cp.q99_abs_error = errors.empty() ? kNaN : sample_quantile(errors, 0.99);
    rep.failed += cp.degenerate;
    if (!rep.chat.empty() && !(cp.median_abs_error < rep.chat.back().median_abs_error)) decreasing = false;
    rep.chat.push_back(std::move(cp));
    if (s + 1 == plan.n_schedule.size()) rep.design = design;
  }
  rep.chat_strictly_decreasing = decreasing && rep.chat.size() >= 2;
  rep.valid = static_cast<double>(rep.failed) <=
              plan.max_failure_fraction * static_cast<double>(plan.replicates * plan.n_schedule.size());
  return rep;
}

// ---------------------------------------------------------------------------

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf,
                    const std::function<double(double)>& left_cdf) {
  if (sample.empty()) throw DataError("KS statistic needs a nonempty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  const auto& left = left_cdf ? left_cdf : cdf;
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i];
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == v) ++j;
    const double below = static_cast<double>(i) / m;  // F_m(v-)
    const double at = static_cast<double>(j) / m;     // F_m(v)
    d = std::max({d, std::fabs(at - cdf(v)), std::fabs(below - left(v))});
    i = j;
  }
  return d;
}

double sample_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) return kNaN;
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return kNaN;
  return sab / std::sqrt(saa * sbb);
}

double sample_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("line fit needs at least two aligned points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DataError("line fit needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() < 3) {
    fit.slope_half_width = kNaN;
    return fit;
  }
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  const double dof = static_cast<double>(x.size() - 2);
  const double se = std::sqrt(ssr / dof / sxx);
  const boost::math::students_t dist(dof);
  fit.slope_half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

std::vector<std::pair<double, double>> normal_qq(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(sample.size());
  const auto m = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out.emplace_back(normal_quantile((static_cast<double>(i) + 0.5) / m), sample[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ZMinusDraw> flat_cell_draws(double lambda, std::size_t cells, Seed seed) {
  const BoundarySpec flat(Constant{1.0});
  const double n = lambda * static_cast<double>(cells);
  const Partition part(cells, 1);
  const CellStats stats = reduce_cells(sample_process(flat, n, 1.0, seed), part);
  std::vector<ZMinusDraw> out(cells);
  const double scale = n * stats.cell_measure();  // n c nu with c = 1
  for (std::size_t r = 0; r < cells; ++r) {
    out[r].count = stats.counts[r];
    out[r].z = scale * stats.ymax[r];
  }
  return out;
}

std::vector<OracleResult> run_oracle_validation(const OraclePlan& plan) {
  if (plan.draws == 0 || plan.cells == 0) throw ConfigError("oracle plan needs draws > 0 and cells > 0");
  std::vector<OracleResult> results;
  for (std::size_t s = 0; s < plan.lambdas.size(); ++s) {
    const double lambda = plan.lambdas[s];
    if (!(lambda > 0.0)) throw ConfigError("oracle lambda must be positive");
    const std::size_t reps = (plan.draws + plan.cells - 1) / plan.cells;
    std::vector<std::vector<ZMinusDraw>> per_rep(reps);
    parallel_for(reps, plan.threads, [&](std::size_t i) {
      per_rep[i] = flat_cell_draws(lambda, plan.cells, replicate_seed(plan.seed, s, i));
    });
    std::vector<double> z;
    std::vector<double> ratio;
    z.reserve(plan.draws);
    ratio.reserve(plan.draws);
    for (const auto& rep : per_rep) {
      for (const auto& dr : rep) {
        if (z.size() == plan.draws) break;
        z.push_back(dr.z);
        ratio.push_back(dr.ratio());
      }
    }

    OracleResult res;
    res.lambda = lambda;
    res.draws = z.size();
    res.closed_form = zminus_moments(CellLaw{lambda});
    const auto m = static_cast<double>(z.size());
    res.mean = mean_of(z);
    res.variance = variance_of(z);
    double m4 = 0.0;
    for (double v : z) m4 += std::pow(v - res.mean, 4);
    m4 /= m;
    res.mean_se = std::sqrt(res.variance / m);
    res.variance_se = std::sqrt(std::max(m4 - res.variance * res.variance, 0.0) / m);
    res.ratio_mean = mean_of(ratio);
    res.ratio_se = std::sqrt(variance_of(ratio) / m);

    const CellLaw law{lambda};
    res.ks = ks_statistic(
        z, [law](double t) { return zminus_cdf(law, t); },
        [law](double t) { return t <= 0.0 ? 0.0 : zminus_cdf(law, t); });

    for (int l = 1; l <= 3; ++l) {
      std::vector<double> powered(ratio.size());
      std::transform(ratio.begin(), ratio.end(), powered.begin(), [l](double v) { return std::pow(v, l); });
      res.ratio_moments.push_back(mean_of(powered));
      res.ratio_moment_se.push_back(std::sqrt(variance_of(powered) / m));
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace ppbound
