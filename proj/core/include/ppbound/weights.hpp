#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ppbound/model.hpp"

namespace ppbound {

enum class KernelShape { Triangular, Epanechnikov, Biweight };

/// Integrated: kappa_r(x) = nu_r^{-1} * integral of K_n(x, t) over cell r.
/// Midpoint:   kappa_r(x) = K_n(x, center of cell r) (the simplified estimate).
enum class WeightMode { Integrated, Midpoint };

/// Geffroy weights kappa_r(x) = k * 1{x in I_r}. Both modes coincide.
struct Indicator {};

/// Product Parzen-Rosenblatt kernel K_n(x, t) = h^{-d} prod_j K((x_j - t_j) / h).
struct Parzen {
  KernelShape kernel = KernelShape::Triangular;
  double bandwidth = 0.1;
  WeightMode mode = WeightMode::Integrated;
};

/// Trigonometric projection onto e_0 .. e_b, d = 1. The order b must be even so
/// the basis contains complete cos/sin pairs and the reproducing kernel is
/// sin((1 + b) pi u) / sin(pi u).
struct Dirichlet {
  std::size_t order = 2;
  WeightMode mode = WeightMode::Integrated;
};

using WeightScheme = std::variant<Indicator, Parzen, Dirichlet>;

std::string to_string(KernelShape shape);
std::string to_string(WeightMode mode);
std::string scheme_tag(const WeightScheme& scheme);

/// Throws ConfigError if the scheme's parameters are unusable for a partition
/// of dimension dim (h <= 0, odd Dirichlet order, Dirichlet with d > 1).
void validate_scheme(const WeightScheme& scheme, std::size_t dim);

/// Copy of the scheme with its mode replaced (Indicator is returned as is).
WeightScheme with_mode(const WeightScheme& scheme, WeightMode mode);

// Base kernel K on [-1, 1] and closed-form integrals.
double kernel_value(KernelShape shape, double u) noexcept;
/// Integral of K over [-1, u].
double kernel_cdf(KernelShape shape, double u) noexcept;
/// Integral of K^2 over [-1, u].
double kernel_square_cdf(KernelShape shape, double u) noexcept;
/// ||K||_2^2.
double kernel_l2_squared(KernelShape shape) noexcept;
double kernel_lipschitz(KernelShape shape) noexcept;

/// K_n(x, t) for a Parzen scheme.
double parzen_kernel(const Parzen& scheme, std::span<const double> x, std::span<const double> t) noexcept;
/// Dirichlet kernel of even order b at x - t, with the removable singularity
/// handled by a series expansion.
double dirichlet_kernel(std::size_t order, double x, double t) noexcept;

/// kappa_r(x) for every cell, kappa_n(x) = ||kappa(x)||_2 and w_r = kappa_r / kappa_n.
struct WeightRow {
  std::vector<double> kappa;
  double kappa_norm = 0.0;
  std::vector<double> w;
};

/// Raw kappa_r(x) without normalization. Throws DomainError for x outside
/// [0,1]^d and ConfigError for an invalid scheme.
std::vector<double> kernel_weights(const WeightScheme& scheme, const Partition& part, std::span<const double> x);

/// Throws DegenerateWeightsError when every kappa_r(x) vanishes.
WeightRow weight_row(const WeightScheme& scheme, const Partition& part, std::span<const double> x);

/// ||K_n(x, .)||_1, ||K_n(x, .)||_2 and sup_t |K_n(x, t)| over E = [0,1]^d.
struct KernelNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double sup = 0.0;
};

/// Parzen or Dirichlet only; Indicator throws ConfigError.
KernelNorms kernel_norms(const WeightScheme& scheme, const Partition& part, std::span<const double> x);

// ---------------------------------------------------------------------------
// Finite-n proxies for the CLT assumptions. The conditions themselves are
// limits and cannot be decided at one n; each flag compares a proxy with a
// configurable tolerance.

struct DiagnosticTolerances {
  double min_expected_count = 5.0;  // H.1: n c nu m per cell
  double n_delta = 0.5;             // H.2: n * delta_n
  double max_weight = 0.25;         // H.4: max_r |w_r(x)|
  double bias_budget = 0.5;         // H.5: n |sum nu kappa fbar - f| / kappa_n
  double h6 = 0.5;                  // H.6: sum |w_r| * max((n delta)^2, n nu e^{-m c n nu}, Delta)
};

struct ProbeDiagnostics {
  std::vector<double> point;
  bool degenerate = false;
  double kappa_norm = 0.0;
  double max_abs_w = 0.0;
  double sum_abs_w = 0.0;
  double bias_budget = 0.0;
  double h6_term = 0.0;
};

struct AssumptionReport {
  double delta_n = 0.0;
  double Delta_n = 0.0;
  double n_delta_n = 0.0;
  double min_expected_count = 0.0;
  double h6_rate = 0.0;
  std::vector<ProbeDiagnostics> probes;
  std::vector<double> sigma_hat;  // p x p row-major, sum_r w_r(x_i) w_r(x_j)
  bool sigma_psd = true;
  bool any_degenerate = false;

  bool h1 = false;
  bool h2 = false;
  bool h3 = false;
  bool h4 = false;
  bool h5 = false;
  bool h6 = false;
  DiagnosticTolerances tolerances;

  double sigma(std::size_t i, std::size_t j) const { return sigma_hat[i * probes.size() + j]; }
};

AssumptionReport diagnose(const WeightScheme& scheme, const Partition& part, const BoundarySpec& spec,
                          const CellProfile& profile, double n, double c,
                          const std::vector<std::vector<double>>& probes, const DiagnosticTolerances& tol = {});

/// True if the symmetric matrix (row-major, size x size) is positive
/// semidefinite up to a relative tolerance.
bool is_positive_semidefinite(std::span<const double> matrix, std::size_t size, double tol = 1e-10);

}  // namespace ppbound
