#pragma once

// Univariate and bivariate standard normal special functions.
//
// All functions are pure and thread-safe. Upper-tail variants are provided
// separately so that p-values near zero keep full relative precision.

namespace fdpburst::gauss {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density.
double std_pdf(double z) noexcept;

/// Phi(z) = P(Z <= z).
double std_cdf(double z) noexcept;

/// Upper tail 1 - Phi(z), computed without cancellation.
double std_sf(double z) noexcept;

/// Phi^{-1}(p). Throws DomainError unless 0 < p < 1.
double std_quantile(double p);

/// Inverse of the upper tail, std_sf^{-1}(p) = -Phi^{-1}(p).
double std_upper_quantile(double p);

/// P(Z1 >= h, Z2 >= k) for a standard bivariate normal with correlation rho.
/// Infinite h or k are allowed.
double bvn_upper(double h, double k, double rho);

/// Covariance of the exceedance indicators 1{Z1 >= sf^{-1}(t)} and
/// 1{Z2 >= sf^{-1}(s)} when corr(Z1, Z2) = rho:
///
///   rho_tilde(t, s, rho) = P(Z1 >= sf^{-1}(t), Z2 >= sf^{-1}(s)) - t s.
///
/// Requires t, s in [0, 1] and rho in [-1, 1]; throws DomainError otherwise.
/// For |rho| < 0.925 the value is the correlation-parameter integral itself,
/// so no cancellation against t s occurs.
double rho_tilde(double t, double s, double rho);

}  // namespace fdpburst::gauss
