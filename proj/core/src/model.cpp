#include "ppbound/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ppbound/errors.hpp"

namespace ppbound {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

struct Interval {
  double lo;
  double hi;
};

bool is_integer(double v) { return std::fabs(v - std::round(v)) < 1e-12; }

// Range of sin(2 pi q x) for x in [a, b], q > 0.
Interval sine_range(double q, double a, double b) {
  const double ta = kTwoPi * q * a;
  const double tb = kTwoPi * q * b;
  const double sa = std::sin(ta);
  const double sb = std::sin(tb);
  Interval out{std::min(sa, sb), std::max(sa, sb)};
  const auto hits = [&](double phase) {
    const double j = std::ceil((ta - phase) / kTwoPi);
    return phase + kTwoPi * j <= tb;
  };
  if (hits(0.5 * std::numbers::pi)) out.hi = 1.0;
  if (hits(1.5 * std::numbers::pi)) out.lo = -1.0;
  return out;
}

// Mean of sin(2 pi q x) over [a, b].
double sine_mean(double q, double a, double b) {
  if (b <= a) return std::sin(kTwoPi * q * a);
  const double w = kTwoPi * q;
  return (std::cos(w * a) - std::cos(w * b)) / (w * (b - a));
}

Interval scale_shift(Interval r, double base, double amp) {
  const double u = base + amp * r.lo;
  const double v = base + amp * r.hi;
  return {std::min(u, v), std::max(u, v)};
}

Interval interval_product(Interval x, Interval y) {
  const double p[4] = {x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

// Antiderivative of |x - c|^alpha.
double cusp_antiderivative(double x, double alpha, double c) {
  const double u = x - c;
  const double mag = std::pow(std::fabs(u), alpha + 1.0) / (alpha + 1.0);
  return u < 0.0 ? -mag : mag;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

BoundarySpec::BoundarySpec(BoundaryKind kind, std::size_t dim) : kind_(std::move(kind)), dim_(dim) {
  require(dim_ >= 1, "boundary dimension must be positive");
  std::visit(
      Overloaded{
          [&](const Constant& c) {
            require(std::isfinite(c.level), "constant level must be finite");
            smoothness_ = C2Periodic{};
          },
          [&](const Linear& l) {
            require(dim_ == 1, "linear boundary is defined for d = 1 only");
            require(std::isfinite(l.intercept) && std::isfinite(l.slope), "linear coefficients must be finite");
            smoothness_ = Holder{1.0};
          },
          [&](const Sine& s) {
            require(dim_ == 1, "sine boundary is defined for d = 1 only");
            require(std::isfinite(s.base) && std::isfinite(s.amplitude), "sine parameters must be finite");
            require(std::isfinite(s.frequency) && s.frequency > 0.0, "sine frequency must be positive");
            smoothness_ = is_integer(s.frequency) ? Smoothness{C2Periodic{}} : Smoothness{Holder{1.0}};
          },
          [&](const HolderCusp& h) {
            require(dim_ == 1, "cusp boundary is defined for d = 1 only");
            require(std::isfinite(h.base), "cusp base must be finite");
            require(h.alpha > 0.0 && h.alpha <= 1.0, "cusp alpha must lie in (0, 1]");
            require(h.center >= 0.0 && h.center <= 1.0, "cusp center must lie in [0, 1]");
            smoothness_ = Holder{h.alpha};
          },
          [&](const ProductSine& p) {
            require(dim_ >= 2, "product-sine boundary needs d >= 2");
            require(std::isfinite(p.base) && std::isfinite(p.amplitude), "product-sine parameters must be finite");
            require(std::isfinite(p.frequency) && p.frequency > 0.0, "product-sine frequency must be positive");
            smoothness_ = is_integer(p.frequency) ? Smoothness{C2Periodic{}} : Smoothness{Holder{1.0}};
          },
      },
      kind_);

  const std::vector<double> lo(dim_, 0.0);
  const std::vector<double> hi(dim_, 1.0);
  const BoxSummary whole = summarize(lo, hi);
  inf_ = whole.inf;
  sup_ = whole.sup;
  integral_ = whole.mean;
  require(inf_ > 0.0, "boundary must be bounded away from zero (inf f = " + std::to_string(inf_) + ")");
}

double BoundarySpec::holder_exponent() const noexcept {
  if (const auto* h = std::get_if<Holder>(&smoothness_)) return h->alpha;
  return 1.0;
}

std::string BoundarySpec::tag() const {
  return std::visit(Overloaded{
                        [](const Constant&) { return std::string("constant"); },
                        [](const Linear&) { return std::string("linear"); },
                        [](const Sine&) { return std::string("sine"); },
                        [](const HolderCusp&) { return std::string("cusp"); },
                        [](const ProductSine&) { return std::string("product_sine"); },
                    },
                    kind_);
}

double BoundarySpec::value(std::span<const double> x) const noexcept {
  return std::visit(Overloaded{
                        [](const Constant& c) { return c.level; },
                        [&](const Linear& l) { return l.intercept + l.slope * x[0]; },
                        [&](const Sine& s) { return s.base + s.amplitude * std::sin(kTwoPi * s.frequency * x[0]); },
                        [&](const HolderCusp& h) { return h.base + std::pow(std::fabs(x[0] - h.center), h.alpha); },
                        [&](const ProductSine& p) {
                          double prod = 1.0;
                          for (double v : x) prod *= std::sin(kTwoPi * p.frequency * v);
                          return p.base + p.amplitude * prod;
                        },
                    },
                    kind_);
}

BoxSummary BoundarySpec::summarize(std::span<const double> lo, std::span<const double> hi) const {
  if (lo.size() != dim_ || hi.size() != dim_) throw ConfigError("box dimension does not match boundary dimension");
  return std::visit(
      Overloaded{
          [](const Constant& c) { return BoxSummary{c.level, c.level, c.level}; },
          [&](const Linear& l) {
            const double a = l.intercept + l.slope * lo[0];
            const double b = l.intercept + l.slope * hi[0];
            return BoxSummary{std::min(a, b), std::max(a, b), 0.5 * (a + b)};
          },
          [&](const Sine& s) {
            const Interval r = scale_shift(sine_range(s.frequency, lo[0], hi[0]), s.base, s.amplitude);
            return BoxSummary{r.lo, r.hi, s.base + s.amplitude * sine_mean(s.frequency, lo[0], hi[0])};
          },
          [&](const HolderCusp& h) {
            const double dl = std::fabs(lo[0] - h.center);
            const double dh = std::fabs(hi[0] - h.center);
            const bool contains = lo[0] <= h.center && h.center <= hi[0];
            const double near = contains ? 0.0 : std::min(dl, dh);
            const double width = hi[0] - lo[0];
            const double mean =
                width > 0.0 ? h.base + (cusp_antiderivative(hi[0], h.alpha, h.center) -
                                        cusp_antiderivative(lo[0], h.alpha, h.center)) /
                                           width
                            : h.base + std::pow(dl, h.alpha);
            return BoxSummary{h.base + std::pow(near, h.alpha), h.base + std::pow(std::max(dl, dh), h.alpha), mean};
          },
          [&](const ProductSine& p) {
            Interval prod{1.0, 1.0};
            double mean = 1.0;
            for (std::size_t j = 0; j < dim_; ++j) {
              prod = interval_product(prod, sine_range(p.frequency, lo[j], hi[j]));
              mean *= sine_mean(p.frequency, lo[j], hi[j]);
            }
            const Interval r = scale_shift(prod, p.base, p.amplitude);
            return BoxSummary{r.lo, r.hi, p.base + p.amplitude * mean};
          },
      },
      kind_);
}

double eval_boundary(const BoundarySpec& spec, std::span<const double> x) {
  if (x.size() != spec.dim()) throw DomainError("point dimension does not match boundary dimension");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) {
      std::ostringstream os;
      os << "point coordinate " << v << " outside [0,1]";
      throw DomainError(os.str());
    }
  }
  return spec.value(x);
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> exact_root(std::size_t k, std::size_t dim) {
  if (k == 0 || dim == 0) return std::nullopt;
  const auto guess = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(k), 1.0 / static_cast<double>(dim))));
  for (std::size_t m = guess > 0 ? guess - 1 : 0; m <= guess + 1; ++m) {
    if (m == 0) continue;
    std::size_t p = 1;
    bool overflow = false;
    for (std::size_t j = 0; j < dim && !overflow; ++j) {
      if (p > k / m + 1) overflow = true;
      p *= m;
    }
    if (!overflow && p == k) return m;
  }
  return std::nullopt;
}

std::size_t next_admissible_k(double value, std::size_t dim) {
  if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError("cell count target must be positive and finite");
  auto m = static_cast<std::size_t>(std::ceil(std::pow(value, 1.0 / static_cast<double>(dim)) - 1e-9));
  m = std::max<std::size_t>(m, 1);
  auto power = [dim](std::size_t base) {
    std::size_t p = 1;
    for (std::size_t j = 0; j < dim; ++j) p *= base;
    return p;
  };
  while (static_cast<double>(power(m)) < value) ++m;
  while (m > 1 && static_cast<double>(power(m - 1)) >= value) --m;
  return power(m);
}

Partition::Partition(std::size_t k, std::size_t dim) : k_(k), dim_(dim), per_axis_(0) {
  if (dim == 0) throw ConfigError("partition dimension must be positive");
  const auto root = exact_root(k, dim);
  if (!root) {
    throw ConfigError("inadmissible cell count k = " + std::to_string(k) + ": k^(1/" + std::to_string(dim) +
                      ") is not an integer");
  }
  per_axis_ = *root;
}

std::size_t Partition::axis_index(std::size_t cell, std::size_t axis) const noexcept {
  for (std::size_t j = 0; j < axis; ++j) cell /= per_axis_;
  return cell % per_axis_;
}

double Partition::lower(std::size_t cell, std::size_t axis) const noexcept {
  return static_cast<double>(axis_index(cell, axis)) / static_cast<double>(per_axis_);
}

double Partition::upper(std::size_t cell, std::size_t axis) const noexcept {
  return static_cast<double>(axis_index(cell, axis) + 1) / static_cast<double>(per_axis_);
}

double Partition::center(std::size_t cell, std::size_t axis) const noexcept {
  return (static_cast<double>(axis_index(cell, axis)) + 0.5) / static_cast<double>(per_axis_);
}

std::vector<double> Partition::lower_corner(std::size_t cell) const {
  std::vector<double> out(dim_);
  for (std::size_t j = 0; j < dim_; ++j) out[j] = lower(cell, j);
  return out;
}

std::vector<double> Partition::upper_corner(std::size_t cell) const {
  std::vector<double> out(dim_);
  for (std::size_t j = 0; j < dim_; ++j) out[j] = upper(cell, j);
  return out;
}

std::vector<double> Partition::center_point(std::size_t cell) const {
  std::vector<double> out(dim_);
  for (std::size_t j = 0; j < dim_; ++j) out[j] = center(cell, j);
  return out;
}

std::size_t Partition::locate_axis(double v) const noexcept {
  const auto i = static_cast<std::size_t>(v * static_cast<double>(per_axis_));
  return std::min(i, per_axis_ - 1);
}

std::size_t Partition::locate(std::span<const double> x) const {
  if (x.size() != dim_) throw DataError("point dimension does not match partition dimension");
  std::size_t cell = 0;
  std::size_t stride = 1;
  for (std::size_t j = 0; j < dim_; ++j) {
    if (!(x[j] >= 0.0 && x[j] <= 1.0)) {
      std::ostringstream os;
      os << "point coordinate " << x[j] << " outside [0,1]";
      throw DataError(os.str());
    }
    cell += locate_axis(x[j]) * stride;
    stride *= per_axis_;
  }
  return cell;
}

CellProfile profile_cells(const BoundarySpec& spec, const Partition& part) {
  if (spec.dim() != part.dim()) throw ConfigError("boundary and partition dimensions differ");
  const std::size_t k = part.size();
  CellProfile out;
  out.inf.resize(k);
  out.sup.resize(k);
  out.mean.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    const BoxSummary s = spec.summarize(part.lower_corner(r), part.upper_corner(r));
    out.inf[r] = s.inf;
    out.sup[r] = s.sup;
    out.mean[r] = s.mean;
    out.oscillation = std::max(out.oscillation, s.sup - s.inf);
  }
  out.weighted_oscillation = out.oscillation * part.cell_measure();
  return out;
}

}  // namespace ppbound
