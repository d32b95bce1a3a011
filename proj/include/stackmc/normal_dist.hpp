#pragma once

namespace stackmc {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

/// Standard normal density.
double norm_pdf(double x) noexcept;

/// Standard normal CDF, computed through std::erfc so the lower tail keeps
/// full relative precision.
double norm_cdf(double x) noexcept;

/// Inverse standard normal CDF (Wichura, AS241 / PPND16). Relative accuracy
/// is about 1e-16 over (0, 1). Returns -inf / +inf at 0 / 1.
double norm_inv(double p) noexcept;

}  // namespace stackmc
