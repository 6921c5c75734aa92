#include "ppbound/simulate.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "ppbound/errors.hpp"

namespace ppbound {

ProcessSample sample_process(const BoundarySpec& spec, double n, double c, Seed seed, std::uint64_t replicate_id) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw ConfigError("sample size index n must be >= 1");
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("intensity constant c must be positive");
  const double top = spec.sup();
  const double box_mean = n * c * top;
  if (!std::isfinite(box_mean) || box_mean > kMaxPoissonMean) {
    throw ConfigError("n * c * M = " + std::to_string(box_mean) + " overflows the Poisson sampler range");
  }

  Rng rng(seed);
  const std::uint64_t box_count = rng.poisson(box_mean);
  const std::size_t d = spec.dim();

  ProcessSample out;
  out.dim = d;
  out.n = n;
  out.c = c;
  out.seed = seed;
  out.replicate_id = replicate_id;
  const auto expected = static_cast<std::size_t>(static_cast<double>(box_count) * spec.integral() / top * 1.05) + 16;
  out.ys.reserve(expected);
  out.xs.reserve(expected * d);

  std::vector<double> x(d);
  for (std::uint64_t i = 0; i < box_count; ++i) {
    for (std::size_t j = 0; j < d; ++j) x[j] = rng.uniform();
    const double y = rng.uniform(0.0, top);
    if (y <= spec.value(x)) {
      out.xs.insert(out.xs.end(), x.begin(), x.end());
      out.ys.push_back(y);
    }
  }
  return out;
}

void write_points_csv_header(std::ostream& os, std::size_t dim) {
  os << "replicate";
  for (std::size_t j = 1; j <= dim; ++j) os << ",x" << j;
  os << ",y\n";
}

void write_points_csv(std::ostream& os, const ProcessSample& sample) {
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < sample.total(); ++i) {
    os << sample.replicate_id;
    for (double v : sample.x(i)) os << ',' << v;
    os << ',' << sample.ys[i] << '\n';
  }
  os.precision(old);
}

}  // namespace ppbound
