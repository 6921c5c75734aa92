#include "ppbound/cells.hpp"

#include <algorithm>
#include <numeric>

#include "ppbound/errors.hpp"

namespace ppbound {

std::uint64_t CellStats::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

CellStats make_cell_stats(std::vector<std::uint64_t> counts, std::vector<double> ymax, double n, double c,
                          std::size_t dim) {
  if (counts.size() != ymax.size() || counts.empty()) throw ConfigError("counts and maxima must be nonempty and aligned");
  CellStats out;
  out.n = n;
  out.c = c;
  out.dim = dim;
  out.counts = std::move(counts);
  out.ymax = std::move(ymax);
  const std::size_t k = out.counts.size();
  const double scale = n * c / static_cast<double>(k);
  out.corrected.assign(k, 0.0);
  out.xi.assign(k, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    const std::uint64_t cnt = out.counts[r];
    if (cnt == 0) {
      out.ymax[r] = 0.0;
      continue;
    }
    out.corrected[r] = (1.0 + 1.0 / static_cast<double>(cnt)) * out.ymax[r];
    out.xi[r] = scale * out.corrected[r];
  }
  return out;
}

CellStats reduce_cells(const ProcessSample& sample, const Partition& part) {
  if (sample.dim != part.dim()) throw ConfigError("sample and partition dimensions differ");
  const std::size_t k = part.size();
  std::vector<std::uint64_t> counts(k, 0);
  std::vector<double> ymax(k, 0.0);
  for (std::size_t i = 0; i < sample.total(); ++i) {
    const std::size_t r = part.locate(sample.x(i));
    const double y = sample.ys[i];
    if (!(y >= 0.0)) throw DataError("point ordinate must be nonnegative");
    ++counts[r];
    ymax[r] = std::max(ymax[r], y);
  }
  return make_cell_stats(std::move(counts), std::move(ymax), sample.n, sample.c, sample.dim);
}

}  // namespace ppbound
