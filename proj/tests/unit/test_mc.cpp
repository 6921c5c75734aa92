#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ppbound/errors.hpp"
#include "ppbound/mc.hpp"
#include "ppbound/normal.hpp"

using namespace ppbound;

namespace {

ExperimentPlan flat_plan() {
  ExperimentPlan plan;
  plan.spec = BoundarySpec(Constant{1.0});
  plan.scheme = Parzen{KernelShape::Triangular, 0.2};
  plan.probes = {{0.5}};
  plan.n_schedule = {20000.0};
  plan.k_rule = ScheduleRule::constant(100.0);
  plan.replicates = 1000;
  plan.seed = 777;
  return plan;
}

}  // namespace

TEST(KsStatistic, Examples) {
  const auto uniform = [](double t) { return std::clamp(t, 0.0, 1.0); };
  const std::vector<double> one{0.5};
  EXPECT_DOUBLE_EQ(ks_statistic(one, uniform), 0.5);
  // m evenly spaced points at (i + 0.5) / m sit 0.5 / m from the diagonal.
  std::vector<double> grid;
  for (int i = 0; i < 40; ++i) grid.push_back((i + 0.5) / 40.0);
  EXPECT_NEAR(ks_statistic(grid, uniform), 0.5 / 40.0, 1e-15);
  // Law with an atom of 0.3 at zero: samples with 30% zeros match it exactly at t = 0.
  const auto atom = [](double t) { return t < 0.0 ? 0.0 : 0.3 + 0.7 * std::min(t, 1.0); };
  const auto atom_left = [](double t) { return t <= 0.0 ? 0.0 : 0.3 + 0.7 * std::min(t, 1.0); };
  std::vector<double> mixed(3, 0.0);
  for (int i = 0; i < 7; ++i) mixed.push_back((i + 0.5) / 7.0);
  EXPECT_NEAR(ks_statistic(mixed, atom, atom_left), 0.05, 1e-12);
  // Using the right-continuous CDF on the left of the atom hides the jump.
  EXPECT_GT(ks_statistic(std::vector<double>(10, 0.0), atom, atom_left), 0.69);
  EXPECT_THROW(ks_statistic(std::vector<double>{}, uniform), DataError);
}

TEST(SampleQuantile, TypeSeven) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(sample_quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sample_quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(sample_quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(sample_quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(sample_quantile({7.0}, 0.3), 7.0);
  EXPECT_THROW(sample_quantile({}, 0.5), DataError);
}

TEST(FitLine, SlopeAndStudentInterval) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.1, 2.9, 5.2, 6.8};
  const auto fit = fit_line(x, y);
  // Hand computation: sxx = 5, sxy = 9.7.
  EXPECT_NEAR(fit.slope, 1.94, 1e-12);
  EXPECT_NEAR(fit.intercept, 1.09, 1e-12);
  const double resid[] = {1.1 - 1.09, 2.9 - 3.03, 5.2 - 4.97, 6.8 - 6.91};
  double ss = 0.0;
  for (double r : resid) ss += r * r;
  EXPECT_NEAR(fit.slope_half_width, 4.302652729911275 * std::sqrt(ss / 2.0 / 5.0), 1e-10);
  EXPECT_TRUE(std::isnan(fit_line(std::vector<double>{0, 1}, std::vector<double>{0, 2}).slope_half_width));
  EXPECT_THROW(fit_line(std::vector<double>{1.0, 1.0}, std::vector<double>{0.0, 1.0}), DataError);
  EXPECT_THROW(fit_line(std::vector<double>{1.0}, std::vector<double>{0.0}), DataError);
}

TEST(Correlation, Examples) {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{2, 4, 6, 8};
  const std::vector<double> c{4, 3, 2, 1};
  const std::vector<double> flat{1, 1, 1, 1};
  EXPECT_NEAR(sample_correlation(a, b), 1.0, 1e-15);
  EXPECT_NEAR(sample_correlation(a, c), -1.0, 1e-15);
  EXPECT_TRUE(std::isnan(sample_correlation(a, flat)));
  EXPECT_TRUE(std::isnan(sample_correlation(a, std::vector<double>{1, 2})));
}

TEST(NormalQq, PlottingPositions) {
  const auto qq = normal_qq({3.0, 1.0, 2.0});
  ASSERT_EQ(qq.size(), 3u);
  EXPECT_NEAR(qq[0].first, normal_quantile(0.5 / 3.0), 1e-15);
  EXPECT_NEAR(qq[1].first, 0.0, 1e-15);
  EXPECT_EQ(qq[0].second, 1.0);
  EXPECT_EQ(qq[2].second, 3.0);
}

TEST(Schedules, RulesAndDefaults) {
  EXPECT_NEAR(default_slow_factor(10.0), std::log(std::log(16.0)), 1e-15);
  EXPECT_NEAR(default_slow_factor(1e6), std::log(std::log(1e6)), 1e-15);
  ScheduleRule k;
  ScheduleRule h;
  default_parzen_rules(1.0, 1, k, h);
  EXPECT_NEAR(h.evaluate(1e4), 1e-2, 1e-15);
  EXPECT_NEAR(k.evaluate(1e4), 100.0 * std::pow(std::log(std::log(1e4)), 2), 1e-9);
  default_parzen_rules(0.5, 2, k, h);
  EXPECT_NEAR(h.evaluate(1e5), std::pow(1e5, -0.4), 1e-15);
  ScheduleRule kd;
  ScheduleRule b;
  default_dirichlet_rules(kd, b);
  EXPECT_NEAR(b.evaluate(1e4), 100.0, 1e-12);
  EXPECT_NEAR(kd.evaluate(1e4), 100.0 * std::log(1e4) * std::pow(std::log(std::log(1e4)), 2), 1e-9);
  EXPECT_EQ(ScheduleRule::constant(42.0).evaluate(1e9), 42.0);
}

TEST(ResolveDesign, RoundsToAdmissibleValues) {
  ExperimentPlan plan;
  plan.spec = BoundarySpec(ProductSine{}, 2);
  plan.scheme = Parzen{KernelShape::Triangular, 0.3};
  plan.k_rule = ScheduleRule::constant(50.0);
  plan.probes = {{0.5, 0.5}};
  auto d = resolve_design(plan, 1000.0);
  EXPECT_EQ(d.k, 64u);
  EXPECT_DOUBLE_EQ(d.smoothing, 0.3);
  plan.smoothing_rule = ScheduleRule::constant(0.05);
  d = resolve_design(plan, 1000.0);
  EXPECT_DOUBLE_EQ(std::get<Parzen>(d.scheme).bandwidth, 0.05);

  ExperimentPlan dir;
  dir.spec = BoundarySpec(Sine{});
  dir.scheme = Dirichlet{2};
  dir.probes = {{0.5}};
  dir.smoothing_rule = ScheduleRule::constant(7.2);
  d = resolve_design(dir, 100.0);
  EXPECT_EQ(std::get<Dirichlet>(d.scheme).order, 8u);
  dir.smoothing_rule = ScheduleRule::constant(10.0);
  EXPECT_EQ(std::get<Dirichlet>(resolve_design(dir, 100.0).scheme).order, 10u);
  dir.smoothing_rule.reset();
  EXPECT_DOUBLE_EQ(resolve_design(dir, 100.0).smoothing, 2.0);
}

TEST(ValidatePlan, Errors) {
  const auto base = flat_plan();
  EXPECT_NO_THROW(validate_plan(base));
  auto p = base;
  p.probes.clear();
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.probes = {{0.0}};
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.probes = {{0.4}, {0.4}};
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.probes = {{0.4, 0.5}};
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.n_schedule = {100.0, 100.0};
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.n_schedule = {0.5};
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.replicates = 0;
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.gamma = 1.0;
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.k_rule = ScheduleRule::constant(-3.0);
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.smoothing_rule = ScheduleRule::constant(0.0);
  EXPECT_THROW(validate_plan(p), ConfigError);
  p = base;
  p.c = 0.0;
  EXPECT_THROW(validate_plan(p), ConfigError);
}

TEST(RunClt, FlatBoundaryIsNearlyNormal) {
  auto plan = flat_plan();
  plan.probes = {{0.3}, {0.7}};
  const auto rep = run_clt(plan);
  ASSERT_TRUE(rep.valid);
  EXPECT_EQ(rep.failed, 0u);
  for (const auto& ps : rep.probes) {
    EXPECT_LE(ps.ks_known, 0.08);
    EXPECT_LE(ps.ks_estimated, 0.08);
    EXPECT_TRUE(ps.ks_defined);
    EXPECT_EQ(ps.z_known.size(), plan.replicates);
    EXPECT_NEAR(ps.kernel_ratio, 1.0, 0.05);
  }
  // Supports [0.1, 0.5] and [0.5, 0.9] share no cell.
  EXPECT_LE(std::fabs(rep.correlation[1]), 0.1);
  EXPECT_DOUBLE_EQ(rep.correlation[0], 1.0);
}

TEST(RunClt, ResultsIndependentOfThreadCount) {
  auto plan = flat_plan();
  plan.replicates = 200;
  plan.n_schedule = {2000.0};
  plan.k_rule = ScheduleRule::constant(20.0);
  plan.threads = 1;
  const auto a = run_clt(plan);
  plan.threads = 4;
  const auto b = run_clt(plan);
  ASSERT_EQ(a.probes.size(), b.probes.size());
  EXPECT_EQ(a.probes[0].z_known, b.probes[0].z_known);
  EXPECT_EQ(a.probes[0].z_estimated, b.probes[0].z_estimated);
  EXPECT_EQ(a.probes[0].replicate_ids, b.probes[0].replicate_ids);
}

TEST(RunClt, StandardizationIdentity) {
  auto plan = flat_plan();
  plan.replicates = 50;
  plan.n_schedule = {3000.0};
  plan.c = 1.5;
  plan.k_rule = ScheduleRule::constant(30.0);
  const auto design = resolve_design(plan, 3000.0);
  const auto outcomes = run_replicates(plan, design, 0);
  const auto rep = run_clt(plan);
  const auto& ps = rep.probes[0];
  const double kn = weight_row(design.scheme, Partition(design.k), ps.point).kappa_norm;
  EXPECT_DOUBLE_EQ(ps.kappa_norm, kn);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    EXPECT_EQ(outcomes[i].id, i);
    EXPECT_DOUBLE_EQ(ps.z_known[i], 3000.0 * 1.5 / kn * (outcomes[i].fhat[0] - 1.0));
    EXPECT_DOUBLE_EQ(ps.z_estimated[i], 3000.0 * outcomes[i].c_hat / kn * (outcomes[i].fhat[0] - 1.0));
  }
}

TEST(RunClt, SingleReplicate) {
  auto plan = flat_plan();
  plan.replicates = 1;
  plan.probes = {{0.3}, {0.6}};
  const auto rep = run_clt(plan);
  EXPECT_FALSE(rep.probes[0].ks_defined);
  EXPECT_TRUE(std::isnan(rep.correlation[1]));
}

TEST(RunClt, FailedReplicatesAreCounted) {
  auto plan = flat_plan();
  plan.n_schedule = {1.0};
  plan.c = 1e-6;
  plan.replicates = 20;
  const auto rep = run_clt(plan);
  EXPECT_EQ(rep.failed, 20u);
  EXPECT_FALSE(rep.valid);
  EXPECT_TRUE(std::isnan(rep.coverage));
}

TEST(RunCoverage, TracksNominalLevel) {
  auto plan = flat_plan();
  plan.c_mode = IntensityMode::Estimated;
  plan.replicates = 400;
  plan.gamma = 0.5;
  EXPECT_NEAR(run_coverage(plan).coverage, 0.5, 0.07);
  plan.gamma = 0.999;
  EXPECT_GE(run_coverage(plan).coverage, 0.98);
}

// At fixed n, doubling c halves the spread of f_hat on a flat boundary.
TEST(RunClt, IntensityScaling) {
  auto plan = flat_plan();
  plan.replicates = 600;
  plan.n_schedule = {10000.0};
  const double rmse1 = run_clt(plan).probes[0].rmse;
  plan.c = 2.0;
  const auto rep2 = run_clt(plan);
  EXPECT_NEAR(rep2.probes[0].rmse / rmse1, 0.5, 0.08);
  EXPECT_LE(rep2.probes[0].ks_known, 0.08);
}

TEST(RunRate, IndicatorAtFixedCellCount) {
  // On a flat boundary the per-cell error scales like k / (n c): slope -1.
  ExperimentPlan plan;
  plan.spec = BoundarySpec(Constant{1.0});
  plan.scheme = Indicator{};
  plan.probes = {{0.25}, {0.75}};
  plan.n_schedule = {500.0, 1000.0, 2000.0, 4000.0};
  plan.k_rule = ScheduleRule::constant(10.0);
  plan.replicates = 300;
  auto rep = run_rate(plan);
  EXPECT_NEAR(rep.slope, -1.0, 0.1);
  EXPECT_EQ(rep.rate.size(), 4u);
  EXPECT_EQ(rep.rate[2].k, 10u);

  // With curvature the fixed partition leaves a bias floor and the error stops falling.
  plan.spec = BoundarySpec(Sine{2.0, 0.5, 1.0});
  plan.probes = {{0.27}, {0.62}};
  plan.n_schedule = {4000.0, 8000.0, 16000.0, 32000.0};
  rep = run_rate(plan);
  EXPECT_GT(rep.slope, -0.15);
}

TEST(RunChat, ConsistencyImprovesWithN) {
  ExperimentPlan plan;
  plan.spec = BoundarySpec(Sine{2.0, 0.5, 1.0});
  plan.scheme = Indicator{};
  plan.probes = {{0.5}};
  plan.n_schedule = {500.0, 2000.0, 8000.0};
  plan.k_rule = ScheduleRule::constant(50.0);
  plan.replicates = 300;
  plan.c = 1.3;
  const auto rep = run_chat_consistency(plan);
  ASSERT_EQ(rep.chat.size(), 3u);
  EXPECT_TRUE(rep.chat_strictly_decreasing);
  EXPECT_EQ(rep.chat[0].ratios.size(), 300u);
  EXPECT_GT(rep.chat[0].q99_abs_error, rep.chat[0].median_abs_error);
  EXPECT_TRUE(rep.valid);
}

TEST(Oracle, PipelineDrawsMatchClosedForm) {
  OraclePlan plan;
  plan.draws = 40000;
  plan.lambdas = {3.0};
  const auto res = run_oracle_validation(plan);
  ASSERT_EQ(res.size(), 1u);
  const auto& r = res[0];
  EXPECT_EQ(r.draws, 40000u);
  EXPECT_NEAR(r.mean, r.closed_form.mean, 4.0 * r.mean_se);
  EXPECT_NEAR(r.variance, r.closed_form.variance, 4.0 * r.variance_se);
  EXPECT_NEAR(r.ratio_mean, r.closed_form.ratio_mean, 4.0 * r.ratio_se);
  EXPECT_LE(r.ks, 1.95 / std::sqrt(40000.0));
  EXPECT_THROW(run_oracle_validation(OraclePlan{{0.0}, 10, 2}), ConfigError);
  const auto draws = flat_cell_draws(3.0, 5, 11);
  EXPECT_EQ(draws.size(), 5u);
  for (const auto& d : draws) EXPECT_LE(d.z, 3.0);
}
