#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ppbound/model.hpp"
#include "ppbound/simulate.hpp"

namespace ppbound {

/// Per-cell extremes of one sample over a partition.
///
/// counts[r]    N_r, points in the slab above cell r
/// ymax[r]      Y*_r, the largest ordinate in the slab (0 when empty)
/// corrected[r] (1 + 1/N_r) Y*_r, the bias-corrected extreme (0 when empty)
/// xi[r]        n c nu_r (1 + 1/N_r) Y*_r, the same on the Z* scale
struct CellStats {
  std::vector<std::uint64_t> counts;
  std::vector<double> ymax;
  std::vector<double> corrected;
  std::vector<double> xi;
  double n = 1.0;
  double c = 1.0;
  std::size_t dim = 1;

  std::size_t cells() const noexcept { return counts.size(); }
  double cell_measure() const noexcept { return 1.0 / static_cast<double>(counts.size()); }
  /// N(S).
  std::uint64_t total() const noexcept;
};

/// Single pass over the points. Throws DataError for a point outside
/// [0,1]^d and ConfigError for a dimension mismatch.
CellStats reduce_cells(const ProcessSample& sample, const Partition& part);

/// Builds the derived columns (corrected, xi) from counts and maxima.
CellStats make_cell_stats(std::vector<std::uint64_t> counts, std::vector<double> ymax, double n, double c,
                          std::size_t dim = 1);

}  // namespace ppbound
