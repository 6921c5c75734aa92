#include "ppbound/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ppbound/errors.hpp"
#include "ppbound/quadrature.hpp"

namespace ppbound {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kPi = std::numbers::pi;

void require_in_cube(std::span<const double> x, std::size_t dim) {
  if (x.size() != dim) throw DomainError("evaluation point dimension does not match partition");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) {
      std::ostringstream os;
      os << "evaluation coordinate " << v << " outside [0,1]";
      throw DomainError(os.str());
    }
  }
}

// Per-axis factor of the integrated product kernel: integral over
// [lo, hi] of h^{-1} K((x - t) / h) dt.
double parzen_axis_mass(KernelShape shape, double h, double x, double lo, double hi) noexcept {
  return kernel_cdf(shape, (x - lo) / h) - kernel_cdf(shape, (x - hi) / h);
}

}  // namespace

std::string to_string(KernelShape shape) {
  switch (shape) {
    case KernelShape::Triangular: return "triangular";
    case KernelShape::Epanechnikov: return "epanechnikov";
    case KernelShape::Biweight: return "biweight";
  }
  return "unknown";
}

std::string to_string(WeightMode mode) { return mode == WeightMode::Integrated ? "integrated" : "midpoint"; }

std::string scheme_tag(const WeightScheme& scheme) {
  return std::visit(Overloaded{
                        [](const Indicator&) { return std::string("indicator"); },
                        [](const Parzen& p) { return "parzen-" + to_string(p.kernel) + "-" + to_string(p.mode); },
                        [](const Dirichlet& d) { return "dirichlet-" + to_string(d.mode); },
                    },
                    scheme);
}

void validate_scheme(const WeightScheme& scheme, std::size_t dim) {
  std::visit(Overloaded{
                 [](const Indicator&) {},
                 [](const Parzen& p) {
                   if (!(p.bandwidth > 0.0) || !std::isfinite(p.bandwidth)) {
                     throw ConfigError("Parzen bandwidth must be positive and finite");
                   }
                 },
                 [dim](const Dirichlet& d) {
                   if (dim != 1) throw ConfigError("Dirichlet weights are defined for d = 1 only");
                   if (d.order % 2 != 0) {
                     throw ConfigError("Dirichlet order b must be even, got " + std::to_string(d.order));
                   }
                 },
             },
             scheme);
}

WeightScheme with_mode(const WeightScheme& scheme, WeightMode mode) {
  return std::visit(Overloaded{
                        [](const Indicator& i) -> WeightScheme { return i; },
                        [mode](Parzen p) -> WeightScheme {
                          p.mode = mode;
                          return p;
                        },
                        [mode](Dirichlet d) -> WeightScheme {
                          d.mode = mode;
                          return d;
                        },
                    },
                    scheme);
}

// ---------------------------------------------------------------------------
// Base kernels.

double kernel_value(KernelShape shape, double u) noexcept {
  const double a = std::fabs(u);
  if (a >= 1.0) return 0.0;
  switch (shape) {
    case KernelShape::Triangular: return 1.0 - a;
    case KernelShape::Epanechnikov: return 0.75 * (1.0 - u * u);
    case KernelShape::Biweight: {
      const double s = 1.0 - u * u;
      return 15.0 / 16.0 * s * s;
    }
  }
  return 0.0;
}

double kernel_cdf(KernelShape shape, double u) noexcept {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  switch (shape) {
    case KernelShape::Triangular:
      return u < 0.0 ? 0.5 * (1.0 + u) * (1.0 + u) : 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
    case KernelShape::Epanechnikov: return 0.5 + 0.75 * (u - u * u * u / 3.0);
    case KernelShape::Biweight: {
      const double u2 = u * u;
      return 0.5 + 15.0 / 16.0 * u * (1.0 - u2 * (2.0 / 3.0 - u2 / 5.0));
    }
  }
  return 0.0;
}

double kernel_square_cdf(KernelShape shape, double u) noexcept {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return kernel_l2_squared(shape);
  switch (shape) {
    case KernelShape::Triangular:
      return u < 0.0 ? std::pow(1.0 + u, 3) / 3.0 : 2.0 / 3.0 - std::pow(1.0 - u, 3) / 3.0;
    case KernelShape::Epanechnikov: {
      // (9/16) * integral of (1 - s^2)^2 from -1 to u.
      const double u2 = u * u;
      return 9.0 / 16.0 * (u * (1.0 - u2 * (2.0 / 3.0 - u2 / 5.0)) + 8.0 / 15.0);
    }
    case KernelShape::Biweight: {
      // (225/256) * integral of (1 - s^2)^4 from -1 to u.
      const double u2 = u * u;
      const double poly = u * (1.0 + u2 * (-4.0 / 3.0 + u2 * (6.0 / 5.0 + u2 * (-4.0 / 7.0 + u2 / 9.0))));
      return 225.0 / 256.0 * (poly + 128.0 / 315.0);
    }
  }
  return 0.0;
}

double kernel_l2_squared(KernelShape shape) noexcept {
  switch (shape) {
    case KernelShape::Triangular: return 2.0 / 3.0;
    case KernelShape::Epanechnikov: return 3.0 / 5.0;
    case KernelShape::Biweight: return 5.0 / 7.0;
  }
  return 0.0;
}

double kernel_lipschitz(KernelShape shape) noexcept {
  switch (shape) {
    case KernelShape::Triangular: return 1.0;
    case KernelShape::Epanechnikov: return 1.5;
    case KernelShape::Biweight: return 15.0 / 16.0 * 8.0 / (3.0 * std::numbers::sqrt3);
  }
  return 0.0;
}

double parzen_kernel(const Parzen& scheme, std::span<const double> x, std::span<const double> t) noexcept {
  double prod = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    prod *= kernel_value(scheme.kernel, (x[j] - t[j]) / scheme.bandwidth) / scheme.bandwidth;
  }
  return prod;
}

double dirichlet_kernel(std::size_t order, double x, double t) noexcept {
  const double u = x - t;
  const double m = 1.0 + static_cast<double>(order);
  const double den = std::sin(kPi * u);
  if (std::fabs(den) < 1e-8) {
    // Near an integer u0 both sines flip sign together (1 + b is odd), so the
    // ratio is the even expansion m (1 - (m^2 - 1) (pi e)^2 / 6) in e = u - u0.
    const double e = u - std::round(u);
    return m * (1.0 - (m * m - 1.0) * kPi * kPi * e * e / 6.0);
  }
  return std::sin(m * kPi * u) / den;
}

// ---------------------------------------------------------------------------

std::vector<double> kernel_weights(const WeightScheme& scheme, const Partition& part, std::span<const double> x) {
  validate_scheme(scheme, part.dim());
  require_in_cube(x, part.dim());
  const std::size_t k = part.size();
  const std::size_t d = part.dim();
  const std::size_t per_axis = part.per_axis();
  const double kd = static_cast<double>(k);
  std::vector<double> kappa(k, 0.0);

  std::visit(
      Overloaded{
          [&](const Indicator&) { kappa[part.locate(x)] = kd; },
          [&](const Parzen& p) {
            // Per-axis factors, then products over the cell's axis indices.
            std::vector<std::vector<double>> factor(d, std::vector<double>(per_axis));
            const double pa = static_cast<double>(per_axis);
            for (std::size_t j = 0; j < d; ++j) {
              for (std::size_t i = 0; i < per_axis; ++i) {
                const double lo = static_cast<double>(i) / pa;
                const double hi = static_cast<double>(i + 1) / pa;
                if (p.mode == WeightMode::Integrated) {
                  factor[j][i] = parzen_axis_mass(p.kernel, p.bandwidth, x[j], lo, hi) * pa;
                } else {
                  const double mid = (static_cast<double>(i) + 0.5) / pa;
                  factor[j][i] = kernel_value(p.kernel, (x[j] - mid) / p.bandwidth) / p.bandwidth;
                }
              }
            }
            for (std::size_t r = 0; r < k; ++r) {
              double prod = 1.0;
              std::size_t rem = r;
              for (std::size_t j = 0; j < d && prod != 0.0; ++j) {
                prod *= factor[j][rem % per_axis];
                rem /= per_axis;
              }
              kappa[r] = prod;
            }
          },
          [&](const Dirichlet& dk) {
            const std::size_t pairs = dk.order / 2;
            for (std::size_t r = 0; r < k; ++r) {
              const double lo = part.lower(r, 0);
              const double hi = part.upper(r, 0);
              if (dk.mode == WeightMode::Midpoint) {
                kappa[r] = dirichlet_kernel(dk.order, x[0], part.center(r, 0));
                continue;
              }
              // K(x, t) = 1 + 2 sum_j cos(2 pi j (x - t)); integrate each term
              // over the cell with its sine antiderivative.
              double acc = hi - lo;
              for (std::size_t j = 1; j <= pairs; ++j) {
                const double w = 2.0 * kPi * static_cast<double>(j);
                acc += (std::sin(w * (x[0] - lo)) - std::sin(w * (x[0] - hi))) / (kPi * static_cast<double>(j));
              }
              kappa[r] = acc * kd;
            }
          },
      },
      scheme);
  return kappa;
}

WeightRow weight_row(const WeightScheme& scheme, const Partition& part, std::span<const double> x) {
  WeightRow row;
  row.kappa = kernel_weights(scheme, part, x);
  double ss = 0.0;
  for (double v : row.kappa) ss += v * v;
  row.kappa_norm = std::sqrt(ss);
  if (!(row.kappa_norm > 0.0)) {
    throw DegenerateWeightsError("all weights vanish at the evaluation point (scheme " + scheme_tag(scheme) + ")");
  }
  row.w.resize(row.kappa.size());
  for (std::size_t r = 0; r < row.kappa.size(); ++r) row.w[r] = row.kappa[r] / row.kappa_norm;
  return row;
}

KernelNorms kernel_norms(const WeightScheme& scheme, const Partition& part, std::span<const double> x) {
  validate_scheme(scheme, part.dim());
  require_in_cube(x, part.dim());
  return std::visit(
      Overloaded{
          [](const Indicator&) -> KernelNorms {
            throw ConfigError("kernel norms are defined for Parzen and Dirichlet schemes only");
          },
          [&](const Parzen& p) {
            KernelNorms out{1.0, 1.0, 1.0};
            const double h = p.bandwidth;
            for (double xj : x) {
              const double upper = xj / h;
              const double lower = (xj - 1.0) / h;
              out.l1 *= kernel_cdf(p.kernel, upper) - kernel_cdf(p.kernel, lower);
              out.l2 *= (kernel_square_cdf(p.kernel, upper) - kernel_square_cdf(p.kernel, lower)) / h;
              out.sup *= kernel_value(p.kernel, 0.0) / h;
            }
            out.l2 = std::sqrt(out.l2);
            return out;
          },
          [&](const Dirichlet& d) {
            // Periodic in x - t, so the norms do not depend on x. The L1 norm
            // is integrated piecewise between consecutive zeros.
            const double m = 1.0 + static_cast<double>(d.order);
            static const GaussLegendre rule(32);
            double l1 = 0.0;
            const auto pieces = static_cast<std::size_t>(m);
            for (std::size_t j = 0; j < pieces; ++j) {
              const double lo = static_cast<double>(j) / m;
              const double hi = static_cast<double>(j + 1) / m;
              l1 += std::fabs(rule.integrate([&](double u) { return dirichlet_kernel(d.order, u, 0.0); }, lo, hi));
            }
            return KernelNorms{l1, std::sqrt(m), m};
          },
      },
      scheme);
}

// ---------------------------------------------------------------------------

bool is_positive_semidefinite(std::span<const double> matrix, std::size_t size, double tol) {
  if (size == 0) return true;
  double scale = 0.0;
  for (std::size_t i = 0; i < size; ++i) scale = std::max(scale, std::fabs(matrix[i * size + i]));
  if (scale == 0.0) scale = 1.0;
  const double jitter = tol * scale;
  // Cholesky of A + jitter I.
  std::vector<double> l(size * size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = matrix[i * size + j] + (i == j ? jitter : 0.0);
      for (std::size_t q = 0; q < j; ++q) s -= l[i * size + q] * l[j * size + q];
      if (i == j) {
        if (s < -jitter) return false;
        l[i * size + i] = std::sqrt(std::max(s, 0.0));
      } else {
        l[i * size + j] = l[j * size + j] > 0.0 ? s / l[j * size + j] : 0.0;
      }
    }
  }
  return true;
}

AssumptionReport diagnose(const WeightScheme& scheme, const Partition& part, const BoundarySpec& spec,
                          const CellProfile& profile, double n, double c,
                          const std::vector<std::vector<double>>& probes, const DiagnosticTolerances& tol) {
  validate_scheme(scheme, part.dim());
  if (spec.dim() != part.dim()) throw ConfigError("boundary and partition dimensions differ");
  if (profile.mean.size() != part.size()) throw ConfigError("cell profile does not match partition");

  const double nu = part.cell_measure();
  AssumptionReport rep;
  rep.tolerances = tol;
  rep.Delta_n = profile.oscillation;
  rep.delta_n = profile.weighted_oscillation;
  rep.n_delta_n = n * rep.delta_n;
  rep.min_expected_count = n * c * nu * spec.inf();
  rep.h6_rate = std::max({rep.n_delta_n * rep.n_delta_n, n * nu * std::exp(-spec.inf() * c * n * nu), rep.Delta_n});

  const std::size_t p = probes.size();
  std::vector<std::vector<double>> rows(p);
  rep.probes.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    ProbeDiagnostics& pd = rep.probes[i];
    pd.point = probes[i];
    try {
      WeightRow row = weight_row(scheme, part, probes[i]);
      pd.kappa_norm = row.kappa_norm;
      double lin = 0.0;
      for (std::size_t r = 0; r < row.w.size(); ++r) {
        pd.max_abs_w = std::max(pd.max_abs_w, std::fabs(row.w[r]));
        pd.sum_abs_w += std::fabs(row.w[r]);
        lin += nu * row.kappa[r] * profile.mean[r];
      }
      pd.bias_budget = n * std::fabs(lin - spec.value(probes[i])) / row.kappa_norm;
      pd.h6_term = pd.sum_abs_w * rep.h6_rate;
      rows[i] = std::move(row.w);
    } catch (const DegenerateWeightsError&) {
      pd.degenerate = true;
      rep.any_degenerate = true;
    }
  }

  rep.sigma_hat.assign(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      if (rows[i].empty() || rows[j].empty()) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < rows[i].size(); ++r) s += rows[i][r] * rows[j][r];
      rep.sigma_hat[i * p + j] = s;
      rep.sigma_hat[j * p + i] = s;
    }
  }
  rep.sigma_psd = is_positive_semidefinite(rep.sigma_hat, p);

  bool h3 = rep.sigma_psd && !rep.any_degenerate;
  bool h4 = !rep.any_degenerate;
  bool h5 = !rep.any_degenerate;
  bool h6 = !rep.any_degenerate;
  for (std::size_t i = 0; i < p; ++i) {
    const ProbeDiagnostics& pd = rep.probes[i];
    if (pd.degenerate) continue;
    h3 = h3 && std::fabs(rep.sigma_hat[i * p + i] - 1.0) < 1e-9;
    h4 = h4 && pd.max_abs_w <= tol.max_weight;
    h5 = h5 && pd.bias_budget <= tol.bias_budget;
    h6 = h6 && pd.h6_term <= tol.h6;
  }
  rep.h1 = rep.min_expected_count >= tol.min_expected_count;
  rep.h2 = rep.n_delta_n <= tol.n_delta;
  rep.h3 = h3;
  rep.h4 = h4;
  rep.h5 = h5;
  rep.h6 = h6;
  return rep;
}

}  // namespace ppbound
