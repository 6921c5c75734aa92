#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ppbound {

// ---------------------------------------------------------------------------
// Boundary catalog. Every kind is a closed-form function on [0,1]^d whose
// per-box infimum, supremum and mean are known analytically.

struct Constant {
  double level = 1.0;
};

/// f(x) = intercept + slope * x, d = 1.
struct Linear {
  double intercept = 1.0;
  double slope = 0.0;
};

/// f(x) = base + amplitude * sin(2 pi frequency x), d = 1.
struct Sine {
  double base = 2.0;
  double amplitude = 0.5;
  double frequency = 1.0;
};

/// f(x) = base + |x - center|^alpha, d = 1.
struct HolderCusp {
  double base = 1.0;
  double alpha = 0.5;
  double center = 0.5;
};

/// f(x) = base + amplitude * prod_j sin(2 pi frequency x_j), d >= 2.
struct ProductSine {
  double base = 2.0;
  double amplitude = 0.5;
  double frequency = 1.0;
};

using BoundaryKind = std::variant<Constant, Linear, Sine, HolderCusp, ProductSine>;

struct Holder {
  double alpha = 1.0;
};
/// C^2 and periodic: f(0) = f(1), f'(0) = f'(1).
struct C2Periodic {};
using Smoothness = std::variant<Holder, C2Periodic>;

/// inf / sup / mean of f over one axis-aligned box.
struct BoxSummary {
  double inf = 0.0;
  double sup = 0.0;
  double mean = 0.0;
};

/// A validated boundary function on [0,1]^d with its analytic metadata.
/// Immutable after construction.
class BoundarySpec {
 public:
  /// Throws ConfigError if the parameters give inf f <= 0, an unsupported
  /// dimension for the kind, or non-finite values.
  BoundarySpec(BoundaryKind kind, std::size_t dim = 1);

  const BoundaryKind& kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  const Smoothness& smoothness() const noexcept { return smoothness_; }

  /// Essential infimum m and supremum M over [0,1]^d.
  double inf() const noexcept { return inf_; }
  double sup() const noexcept { return sup_; }
  /// a = integral of f over [0,1]^d.
  double integral() const noexcept { return integral_; }

  /// Holder exponent driving the rate schedules (1 for C2Periodic kinds).
  double holder_exponent() const noexcept;

  /// Short tag used in config files and reports ("sine", "cusp", ...).
  std::string tag() const;

  /// f(x) without domain checks; x.size() must equal dim().
  double value(std::span<const double> x) const noexcept;

  /// Exact inf/sup/mean over the box prod_j [lo_j, hi_j].
  BoxSummary summarize(std::span<const double> lo, std::span<const double> hi) const;

 private:
  BoundaryKind kind_;
  std::size_t dim_;
  Smoothness smoothness_;
  double inf_ = 0.0;
  double sup_ = 0.0;
  double integral_ = 0.0;
};

/// f(x). Throws DomainError when x is not in [0,1]^d or has the wrong size.
double eval_boundary(const BoundarySpec& spec, std::span<const double> x);

// ---------------------------------------------------------------------------
// Equidistant box partition of [0,1]^d into k cells of side k^{-1/d}.
// Cells are numbered 0..k-1 with axis 0 varying fastest.

class Partition {
 public:
  /// Throws ConfigError unless k^{1/d} is a positive integer.
  Partition(std::size_t k, std::size_t dim = 1);

  std::size_t size() const noexcept { return k_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t per_axis() const noexcept { return per_axis_; }
  /// nu(I_r) = 1/k for every cell.
  double cell_measure() const noexcept { return 1.0 / static_cast<double>(k_); }

  std::size_t axis_index(std::size_t cell, std::size_t axis) const noexcept;
  double lower(std::size_t cell, std::size_t axis) const noexcept;
  double upper(std::size_t cell, std::size_t axis) const noexcept;
  double center(std::size_t cell, std::size_t axis) const noexcept;
  std::vector<double> lower_corner(std::size_t cell) const;
  std::vector<double> upper_corner(std::size_t cell) const;
  std::vector<double> center_point(std::size_t cell) const;

  /// Axis index of coordinate v in [0,1]. Interior edges belong to the
  /// upper cell; v = 1 belongs to the last cell.
  std::size_t locate_axis(double v) const noexcept;
  /// Cell containing x. Throws DataError if x is outside [0,1]^d.
  std::size_t locate(std::span<const double> x) const;

 private:
  std::size_t k_;
  std::size_t dim_;
  std::size_t per_axis_;
};

/// The integer m with m^d == k, if any.
std::optional<std::size_t> exact_root(std::size_t k, std::size_t dim);
/// Smallest admissible k (integer d-th root) that is >= value.
std::size_t next_admissible_k(double value, std::size_t dim);

/// Per-cell inf / sup / mean of f and the oscillation aggregates
/// Delta_n = max_r (M_r - m_r) and delta_n = max_r nu_r (M_r - m_r).
struct CellProfile {
  std::vector<double> inf;
  std::vector<double> sup;
  std::vector<double> mean;
  double oscillation = 0.0;           // Delta_n
  double weighted_oscillation = 0.0;  // delta_n
};

/// Throws ConfigError on a dimension mismatch.
CellProfile profile_cells(const BoundarySpec& spec, const Partition& part);

}  // namespace ppbound
