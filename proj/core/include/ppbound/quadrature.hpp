#pragma once

#include <cstddef>
#include <vector>

namespace ppbound {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t order);

  /// Integral of fn over [lo, hi]; exact for polynomials of degree < 2 * order.
  template <typename Fn>
  double integrate(Fn&& fn, double lo, double hi) const {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * fn(mid + half * nodes[i]);
    return acc * half;
  }
};

}  // namespace ppbound
