#pragma once

namespace ppbound {

double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

/// Standard-normal inverse CDF for p in (0, 1). Acklam's rational
/// approximation followed by one Halley step on the erfc equation; absolute
/// error below 1e-12 in the central region. Throws DomainError outside (0, 1).
double normal_quantile(double p);

/// z such that P(|Z| <= z) = gamma, i.e. the (1 + gamma) / 2 quantile.
/// gamma must lie in [0, 1).
double two_sided_z(double gamma);

}  // namespace ppbound
