#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "ppbound/errors.hpp"
#include "ppbound/model.hpp"
#include "ppbound/weights.hpp"

using namespace ppbound;

namespace {

constexpr KernelShape kShapes[] = {KernelShape::Triangular, KernelShape::Epanechnikov, KernelShape::Biweight};

std::vector<WeightScheme> schemes_1d() {
  std::vector<WeightScheme> out{Indicator{}};
  for (auto s : kShapes) {
    out.push_back(Parzen{s, 0.07, WeightMode::Integrated});
    out.push_back(Parzen{s, 0.07, WeightMode::Midpoint});
  }
  out.push_back(Dirichlet{10, WeightMode::Integrated});
  out.push_back(Dirichlet{10, WeightMode::Midpoint});
  return out;
}

double sum_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST(WeightRow, UnitNormForEveryScheme) {
  const Partition part(50);
  for (const auto& scheme : schemes_1d()) {
    for (double x : {0.013, 0.25, 0.5, 0.731, 0.99}) {
      const double p[1] = {x};
      const auto row = weight_row(scheme, part, p);
      EXPECT_NEAR(sum_sq(row.w), 1.0, 1e-12) << scheme_tag(scheme) << " x=" << x;
      EXPECT_NEAR(row.kappa_norm, std::sqrt(sum_sq(row.kappa)), 1e-12 * row.kappa_norm);
    }
  }
  const Partition grid(64, 2);
  const double p[2] = {0.3, 0.62};
  const auto row = weight_row(Parzen{KernelShape::Biweight, 0.2}, grid, p);
  EXPECT_NEAR(sum_sq(row.w), 1.0, 1e-12);
}

TEST(WeightRow, IndicatorSingleCell) {
  const Partition part(10);
  const double x[1] = {0.25};
  const auto row = weight_row(Indicator{}, part, x);
  EXPECT_DOUBLE_EQ(row.kappa_norm, 10.0);
  for (std::size_t r = 0; r < 10; ++r) EXPECT_EQ(row.w[r], r == 2 ? 1.0 : 0.0);
}

TEST(WeightRow, IndicatorModesCoincide) {
  const auto mid = with_mode(Indicator{}, WeightMode::Midpoint);
  EXPECT_TRUE(std::holds_alternative<Indicator>(mid));
}

TEST(Kernels, DirichletPeakValue) {
  for (std::size_t b : {0u, 2u, 8u, 70u}) {
    for (double t : {0.0, 0.3, 0.999}) {
      EXPECT_NEAR(dirichlet_kernel(b, t, t), 1.0 + static_cast<double>(b), 1e-12);
      EXPECT_NEAR(dirichlet_kernel(b, t + 1.0, t), 1.0 + static_cast<double>(b), 1e-9);
    }
  }
}

TEST(Kernels, DirichletMatchesClosedFormAwayFromPeak) {
  for (std::size_t b : {2u, 8u, 40u}) {
    for (double u = -0.97; u < 1.0; u += 0.0137) {
      EXPECT_NEAR(dirichlet_kernel(b, u, 0.0), oracle::dirichlet(b, u), 1e-9) << "b=" << b << " u=" << u;
    }
    // Near the singular points the expansion joins the closed form smoothly.
    for (double e : {1e-7, 3e-9, -2e-8}) {
      EXPECT_NEAR(dirichlet_kernel(b, e, 0.0), oracle::dirichlet(b, e), 1e-9);
    }
  }
}

TEST(Kernels, ShapesAreDensitiesAndLipschitz) {
  for (auto s : kShapes) {
    EXPECT_NEAR(oracle::gl64([&](double u) { return kernel_value(s, u); }, -1.0, 1.0, {0.0}), 1.0, 1e-10);
    EXPECT_NEAR(kernel_cdf(s, 1.0), 1.0, 1e-14);
    EXPECT_EQ(kernel_cdf(s, -1.5), 0.0);
    EXPECT_EQ(kernel_value(s, 1.2), 0.0);
    double max_slope = 0.0;
    for (double u = -1.2; u < 1.2; u += 1e-4) {
      ASSERT_GE(kernel_value(s, u), 0.0);
      EXPECT_NEAR(kernel_value(s, u), oracle::kernel(s, u), 1e-14);
      max_slope = std::max(max_slope, std::fabs(kernel_value(s, u + 1e-5) - kernel_value(s, u)) / 1e-5);
    }
    EXPECT_LE(max_slope, kernel_lipschitz(s) * (1.0 + 1e-3));
    EXPECT_GE(max_slope, kernel_lipschitz(s) * (1.0 - 1e-3));
    for (double u : {-0.9, -0.3, 0.0, 0.45, 0.8}) {
      EXPECT_NEAR(kernel_cdf(s, u), oracle::gl64([&](double v) { return oracle::kernel(s, v); }, -1.0, u, {0.0}),
                  1e-12);
      EXPECT_NEAR(kernel_square_cdf(s, u),
                  oracle::gl64([&](double v) { return std::pow(oracle::kernel(s, v), 2); }, -1.0, u, {0.0}), 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(kernel_lipschitz(KernelShape::Triangular), 1.0);
}

TEST(Weights, ParzenMassConservation) {
  const Partition part(10);
  const double x[1] = {0.5};
  const auto kappa = kernel_weights(Parzen{KernelShape::Triangular, 0.2, WeightMode::Integrated}, part, x);
  double mass = 0.0;
  for (double v : kappa) mass += v * part.cell_measure();
  EXPECT_NEAR(mass, 1.0, 1e-12);
  for (auto s : kShapes) {
    const Partition fine(37);
    const double y[1] = {0.41};
    const auto kap = kernel_weights(Parzen{s, 0.13}, fine, y);
    double m = 0.0;
    for (double v : kap) m += v * fine.cell_measure();
    EXPECT_NEAR(m, 1.0, 1e-12);
  }
}

TEST(Weights, IntegratedParzenMatchesQuadrature) {
  const Partition part(40);
  for (auto s : kShapes) {
    for (double h : {0.011, 0.07, 0.3}) {
      for (double x : {0.004, 0.3, 0.5125, 0.97}) {
        const double p[1] = {x};
        const auto kappa = kernel_weights(Parzen{s, h, WeightMode::Integrated}, part, p);
        for (std::size_t r = 0; r < part.size(); ++r) {
          const double lo = part.lower(r, 0);
          const double hi = part.upper(r, 0);
          const double ref =
              oracle::gl64([&](double t) { return oracle::kernel(s, (x - t) / h) / h; }, lo, hi, {x - h, x, x + h}) *
              40.0;
          ASSERT_NEAR(kappa[r], ref, 1e-10) << to_string(s) << " h=" << h << " x=" << x << " r=" << r;
        }
      }
    }
  }
}

TEST(Weights, IntegratedParzenTwoDimensional) {
  const Partition part(25, 2);
  const double x[2] = {0.33, 0.71};
  const double h = 0.15;
  const auto s = KernelShape::Epanechnikov;
  const auto kappa = kernel_weights(Parzen{s, h}, part, x);
  for (std::size_t r = 0; r < part.size(); ++r) {
    double ref = 25.0;
    for (std::size_t j = 0; j < 2; ++j) {
      ref *= oracle::gl64([&](double t) { return oracle::kernel(s, (x[j] - t) / h) / h; }, part.lower(r, j),
                          part.upper(r, j), {x[j] - h, x[j], x[j] + h});
    }
    EXPECT_NEAR(kappa[r], ref, 1e-10) << r;
  }
}

TEST(Weights, IntegratedDirichletMatchesQuadrature) {
  const Partition part(30);
  for (std::size_t b : {2u, 10u, 36u}) {
    for (double x : {0.05, 0.5, 0.6789}) {
      const double p[1] = {x};
      const auto kappa = kernel_weights(Dirichlet{b, WeightMode::Integrated}, part, p);
      for (std::size_t r = 0; r < part.size(); ++r) {
        const double ref =
            oracle::gl64([&](double t) { return oracle::dirichlet(b, x - t); }, part.lower(r, 0), part.upper(r, 0)) *
            30.0;
        ASSERT_NEAR(kappa[r], ref, 1e-10) << "b=" << b << " x=" << x << " r=" << r;
      }
    }
  }
}

TEST(Weights, MidpointEvaluatesKernelAtCenters) {
  const Partition part(20);
  const double x[1] = {0.44};
  const auto par = kernel_weights(Parzen{KernelShape::Biweight, 0.12, WeightMode::Midpoint}, part, x);
  const auto dir = kernel_weights(Dirichlet{6, WeightMode::Midpoint}, part, x);
  for (std::size_t r = 0; r < 20; ++r) {
    const double t = (static_cast<double>(r) + 0.5) / 20.0;
    EXPECT_NEAR(par[r], oracle::kernel(KernelShape::Biweight, (0.44 - t) / 0.12) / 0.12, 1e-12);
    EXPECT_NEAR(dir[r], oracle::dirichlet(6, 0.44 - t), 1e-10);
  }
}

TEST(Weights, DegenerateMidpointThrows) {
  // h far below half a cell: no center lies within the support.
  const Partition part(10);
  const double x[1] = {0.1};
  EXPECT_THROW(weight_row(Parzen{KernelShape::Triangular, 0.01, WeightMode::Midpoint}, part, x),
               DegenerateWeightsError);
  EXPECT_NO_THROW(weight_row(Parzen{KernelShape::Triangular, 0.01, WeightMode::Integrated}, part, x));
}

TEST(Weights, DomainAndConfigErrors) {
  const Partition part(10);
  const double out[1] = {1.2};
  EXPECT_THROW(kernel_weights(Indicator{}, part, out), DomainError);
  const double in[1] = {0.5};
  EXPECT_THROW(kernel_weights(Parzen{KernelShape::Triangular, 0.0}, part, in), ConfigError);
  EXPECT_THROW(kernel_weights(Dirichlet{3}, part, in), ConfigError);
  const Partition grid(4, 2);
  const double p2[2] = {0.5, 0.5};
  EXPECT_THROW(kernel_weights(Dirichlet{4}, grid, p2), ConfigError);
  EXPECT_THROW(validate_scheme(Parzen{KernelShape::Triangular, -1.0}, 1), ConfigError);
  EXPECT_THROW(validate_scheme(Parzen{KernelShape::Triangular, std::nan("")}, 1), ConfigError);
  EXPECT_NO_THROW(validate_scheme(Dirichlet{0}, 1));
}

TEST(KernelNorms, Dirichlet) {
  const Partition part(10);
  const double x[1] = {0.3};
  const auto norms = kernel_norms(Dirichlet{8}, part, x);
  EXPECT_NEAR(norms.l2, 3.0, 1e-14);
  EXPECT_NEAR(norms.sup, 9.0, 1e-14);
  std::vector<double> zeros;
  for (int j = 1; j < 9; ++j) zeros.push_back(j / 9.0);
  const double l1 = oracle::gl64([](double u) { return std::fabs(oracle::dirichlet(8, u)); }, 0.0, 1.0, zeros);
  EXPECT_NEAR(norms.l1, l1, 1e-10);
  // Squared L2 norm by quadrature, as a check on the closed form.
  const double l2sq = oracle::gl64([](double u) { return std::pow(oracle::dirichlet(8, u), 2); }, 0.0, 1.0, zeros);
  EXPECT_NEAR(l2sq, 9.0, 1e-10);
}

TEST(KernelNorms, ParzenInterior) {
  const Partition part(10);
  const double x[1] = {0.5};
  const double h = 0.1;
  const double expected_sq[] = {2.0 / 3.0, 3.0 / 5.0, 5.0 / 7.0};
  for (int i = 0; i < 3; ++i) {
    const auto s = kShapes[i];
    const auto norms = kernel_norms(Parzen{s, h}, part, x);
    EXPECT_NEAR(norms.l2 * norms.l2, expected_sq[i] / h, 1e-12);
    EXPECT_NEAR(norms.l1, 1.0, 1e-14);
    EXPECT_NEAR(norms.sup, oracle::kernel(s, 0.0) / h, 1e-12);
    const double quad =
        oracle::gl64([&](double u) { return std::pow(oracle::kernel(s, u), 2); }, -1.0, 1.0, {0.0});
    EXPECT_NEAR(quad, expected_sq[i], 1e-12);
  }
  EXPECT_THROW(kernel_norms(Indicator{}, part, x), ConfigError);
}

TEST(KernelNorms, ParzenTruncatedAtEdge) {
  const Partition part(10);
  const double x[1] = {0.0};
  const auto norms = kernel_norms(Parzen{KernelShape::Triangular, 0.2}, part, x);
  EXPECT_NEAR(norms.l1, 0.5, 1e-14);
  EXPECT_NEAR(norms.l2 * norms.l2, (1.0 / 3.0) / 0.2, 1e-12);
}

// kappa_n(x) approaches k^{1/2} ||K_n(x, .)||_2 once the bandwidth spans many cells.
TEST(KernelNorms, NormRatioNearOneForWideKernels) {
  for (auto s : kShapes) {
    for (std::size_t k : {500u, 1000u, 4000u}) {
      const double h = 50.0 / static_cast<double>(k) * 1.3;
      const Partition part(k);
      const double x[1] = {0.5};
      const auto row = weight_row(Parzen{s, h}, part, x);
      const auto norms = kernel_norms(Parzen{s, h}, part, x);
      const double ratio = row.kappa_norm / (std::sqrt(static_cast<double>(k)) * norms.l2);
      EXPECT_NEAR(ratio, 1.0, 0.02) << to_string(s) << " k=" << k;
    }
  }
}

TEST(Diagnose, DirichletOffDiagonalBound) {
  const Partition part(600);
  const CellProfile prof = profile_cells(BoundarySpec(Constant{1.0}), part);
  for (std::size_t b : {20u, 40u, 70u}) {
    const std::vector<std::vector<double>> probes{{0.2}, {0.35}, {0.5}, {0.52}, {0.8}};
    const auto rep = diagnose(Dirichlet{b}, part, BoundarySpec(Constant{1.0}), prof, 1000.0, 1.0, probes);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      for (std::size_t j = i + 1; j < probes.size(); ++j) {
        const double u = probes[i][0] - probes[j][0];
        const double bound = 3.0 / ((1.0 + static_cast<double>(b)) * std::fabs(std::sin(std::numbers::pi * u))) + 0.05;
        EXPECT_LE(std::fabs(rep.sigma(i, j)), bound) << "b=" << b << " i=" << i << " j=" << j;
      }
    }
  }
}

TEST(Diagnose, FlatBoundaryAndDisjointSupports) {
  const BoundarySpec flat(Constant{1.0});
  const Partition part(10);
  const auto prof = profile_cells(flat, part);
  const std::vector<std::vector<double>> probes{{0.3}, {0.7}};
  const auto rep = diagnose(Indicator{}, part, flat, prof, 1000.0, 1.0, probes);
  EXPECT_EQ(rep.Delta_n, 0.0);
  EXPECT_EQ(rep.delta_n, 0.0);
  EXPECT_EQ(rep.sigma(0, 1), 0.0);
  EXPECT_NEAR(rep.sigma(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(rep.probes[0].bias_budget, 0.0, 1e-10);
  EXPECT_DOUBLE_EQ(rep.min_expected_count, 100.0);
  EXPECT_TRUE(rep.h1);
  EXPECT_TRUE(rep.h2);
  EXPECT_TRUE(rep.h3);
  EXPECT_FALSE(rep.h4);  // indicator weights are one-hot
  EXPECT_TRUE(rep.h5);

  const Partition fine(400);
  const auto pf = profile_cells(flat, fine);
  const auto par = diagnose(Parzen{KernelShape::Triangular, 0.1}, fine, flat, pf, 1000.0, 1.0, {{0.25}, {0.75}});
  EXPECT_EQ(par.sigma(0, 1), 0.0);
  EXPECT_TRUE(par.sigma_psd);
  EXPECT_TRUE(par.h4);
}

TEST(Diagnose, SineBoundaryBiasBudgetMatchesDirectComputation) {
  const BoundarySpec spec(Sine{2.0, 0.5, 1.0});
  const Partition part(250);
  const auto prof = profile_cells(spec, part);
  const Parzen scheme{KernelShape::Triangular, 0.05};
  const std::vector<std::vector<double>> probes{{0.25}, {0.5}};
  const double n = 5000.0;
  const auto rep = diagnose(scheme, part, spec, prof, n, 1.0, probes);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto row = weight_row(scheme, part, probes[i]);
    // Independent linear form: sum over cells of (kernel mass) x (cell mean of f).
    const double x = probes[i][0];
    const auto f = [&](double t) {
      const double q[1] = {t};
      return spec.value(q);
    };
    double smoothed = 0.0;
    for (std::size_t r = 0; r < part.size(); ++r) {
      const double lo = part.lower(r, 0);
      const double hi = part.upper(r, 0);
      if (hi < x - 0.05 || lo > x + 0.05) continue;
      const double mass = oracle::gl64(
          [&](double t) { return oracle::kernel(KernelShape::Triangular, (x - t) / 0.05) / 0.05; }, lo, hi,
          {x - 0.05, x, x + 0.05});
      smoothed += mass * oracle::gl64(f, lo, hi) * 250.0;
    }
    const double p[1] = {x};
    EXPECT_NEAR(rep.probes[i].bias_budget, n * std::fabs(smoothed - spec.value(p)) / row.kappa_norm, 1e-8);
  }
  EXPECT_NEAR(rep.Delta_n, prof.oscillation, 0.0);
  EXPECT_NEAR(rep.n_delta_n, n * prof.weighted_oscillation, 1e-12);
  const double rate = std::max({rep.n_delta_n * rep.n_delta_n, n / 250.0 * std::exp(-1.5 * n / 250.0), rep.Delta_n});
  EXPECT_NEAR(rep.h6_rate, rate, 1e-15);
}

TEST(Diagnose, DegenerateProbeReported) {
  const BoundarySpec flat(Constant{1.0});
  const Partition part(10);
  const auto prof = profile_cells(flat, part);
  const auto rep =
      diagnose(Parzen{KernelShape::Triangular, 0.01, WeightMode::Midpoint}, part, flat, prof, 100.0, 1.0, {{0.1}, {0.55}});
  EXPECT_TRUE(rep.any_degenerate);
  EXPECT_TRUE(rep.probes[0].degenerate);
  EXPECT_FALSE(rep.probes[1].degenerate);
  EXPECT_FALSE(rep.h3);
}

TEST(Diagnose, MismatchErrors) {
  const BoundarySpec flat(Constant{1.0});
  const Partition part(10);
  const auto prof = profile_cells(flat, Partition(5));
  EXPECT_THROW(diagnose(Indicator{}, part, flat, prof, 100.0, 1.0, {{0.5}}), ConfigError);
  const BoundarySpec plane(Constant{1.0}, 2);
  EXPECT_THROW(diagnose(Indicator{}, part, plane, profile_cells(flat, part), 100.0, 1.0, {{0.5}}), ConfigError);
}

TEST(PositiveSemidefinite, Examples) {
  const std::vector<double> id{1, 0, 0, 1};
  const std::vector<double> rank1{1, 1, 1, 1};
  const std::vector<double> indefinite{1, 2, 2, 1};
  EXPECT_TRUE(is_positive_semidefinite(id, 2));
  EXPECT_TRUE(is_positive_semidefinite(rank1, 2));
  EXPECT_FALSE(is_positive_semidefinite(indefinite, 2));
  const std::vector<double> three{2, -1, 0, -1, 2, -1, 0, -1, 2};
  EXPECT_TRUE(is_positive_semidefinite(three, 3));
  EXPECT_TRUE(is_positive_semidefinite({}, 0));
}
