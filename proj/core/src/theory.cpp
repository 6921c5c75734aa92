#include "ppbound/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppbound/errors.hpp"

namespace ppbound {

double zminus_cdf(CellLaw law, double t) noexcept {
  if (t < 0.0) return 0.0;
  if (t >= law.lambda) return 1.0;
  return std::exp(t - law.lambda);
}

ZMinusMoments zminus_moments(CellLaw law) noexcept {
  const double l = law.lambda;
  const double e = std::exp(-l);
  const double one_minus_e = -std::expm1(-l);
  ZMinusMoments m;
  m.mean = l - one_minus_e;
  m.variance = -std::expm1(-2.0 * l) - 2.0 * l * e;
  m.ratio_mean = one_minus_e - l * e;
  return m;
}

double conditional_max_cdf(CellLaw law, double t, std::uint64_t q) {
  if (!(law.lambda > 0.0)) throw DomainError("cell law needs lambda > 0");
  if (!(t >= 0.0 && t <= law.lambda)) {
    throw DomainError("conditional_max_cdf: t = " + std::to_string(t) + " outside [0, lambda]");
  }
  if (q == 0) return 1.0;
  return std::pow(t / law.lambda, static_cast<double>(q));
}

ZMinusDraw draw_zminus(CellLaw law, Rng& rng) {
  ZMinusDraw d;
  d.count = rng.poisson(law.lambda);
  double mx = 0.0;
  for (std::uint64_t i = 0; i < d.count; ++i) mx = std::max(mx, rng.uniform());
  d.z = law.lambda * mx;
  return d;
}

WeightArray weight_array_from_rows(const std::vector<WeightRow>& rows) {
  WeightArray a;
  a.dim = rows.size();
  if (rows.empty()) return a;
  a.cells = rows.front().w.size();
  a.values.assign(a.cells * a.dim, 0.0);
  for (std::size_t i = 0; i < a.dim; ++i) {
    if (rows[i].w.size() != a.cells) throw ConfigError("weight rows have different lengths");
    for (std::size_t r = 0; r < a.cells; ++r) a.values[r * a.dim + i] = rows[i].w[r];
  }
  return a;
}

ArrayDiagnostics check_array(const ArrayCheckInput& input) {
  const WeightArray& w = input.weights;
  if (w.values.size() != w.cells * w.dim) throw ConfigError("weight array is not rectangular");
  ArrayDiagnostics out;

  for (const auto& dir : input.directions) {
    if (dir.size() != w.dim) throw ConfigError("direction length does not match the array dimension");
    double q = 0.0;
    for (std::size_t r = 0; r < w.cells; ++r) {
      double dot = 0.0;
      for (std::size_t i = 0; i < w.dim; ++i) dot += w.at(r, i) * dir[i];
      q += dot * dot;
    }
    out.quad_form.push_back(q);
    if (input.sigma) {
      const auto& s = *input.sigma;
      if (s.size() != w.dim * w.dim) throw ConfigError("sigma must be p x p");
      double t = 0.0;
      for (std::size_t i = 0; i < w.dim; ++i) {
        for (std::size_t j = 0; j < w.dim; ++j) t += dir[i] * s[i * w.dim + j] * dir[j];
      }
      out.target_quad_form.push_back(t);
    }
  }

  for (std::size_t r = 0; r < w.cells; ++r) {
    double ss = 0.0;
    for (std::size_t i = 0; i < w.dim; ++i) ss += w.at(r, i) * w.at(r, i);
    out.max_norm = std::max(out.max_norm, std::sqrt(ss));
  }
  out.a4_satisfied = out.max_norm <= input.max_norm_tolerance;

  if (!input.samples.empty()) {
    double verr = 0.0;
    std::vector<double> tails(input.alphas.size(), 0.0);
    for (const auto& cell : input.samples) {
      if (cell.empty()) continue;
      double m2 = 0.0;
      std::vector<double> tail(input.alphas.size(), 0.0);
      for (double z : cell) {
        m2 += z * z;
        for (std::size_t a = 0; a < input.alphas.size(); ++a) {
          if (std::fabs(z) > input.alphas[a]) tail[a] += z * z;
        }
      }
      const auto cnt = static_cast<double>(cell.size());
      verr = std::max(verr, std::fabs(m2 / cnt - 1.0));
      for (std::size_t a = 0; a < tails.size(); ++a) tails[a] = std::max(tails[a], tail[a] / cnt);
    }
    out.variance_error = verr;
    out.lindeberg_tail = std::move(tails);
  }
  return out;
}

}  // namespace ppbound
