#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ppbound/model.hpp"
#include "ppbound/rng.hpp"

namespace ppbound {

/// One realization of the Poisson process with intensity n c (Lebesgue x
/// Lebesgue) restricted to the hypograph S = {(x, y) : 0 <= y <= f(x)}.
struct ProcessSample {
  std::size_t dim = 1;
  std::vector<double> xs;  // row-major, total() rows of dim coordinates
  std::vector<double> ys;
  double n = 1.0;
  double c = 1.0;
  Seed seed = 0;
  std::uint64_t replicate_id = 0;

  std::size_t total() const noexcept { return ys.size(); }
  std::span<const double> x(std::size_t i) const noexcept { return {xs.data() + i * dim, dim}; }
};

/// Exact simulation by thinning a homogeneous process on [0,1]^d x [0, M]:
/// N_box ~ Poisson(n c M) uniform points, keep those with y <= f(x).
/// Deterministic in (spec, n, c, seed). Throws ConfigError for n < 1, c <= 0,
/// or n c M outside the Poisson sampler's range.
ProcessSample sample_process(const BoundarySpec& spec, double n, double c, Seed seed,
                             std::uint64_t replicate_id = 0);

/// Writes the CSV rows `replicate,x1..xd,y` (no header).
void write_points_csv(std::ostream& os, const ProcessSample& sample);
/// Header line for the point dump.
void write_points_csv_header(std::ostream& os, std::size_t dim);

}  // namespace ppbound
