#pragma once

// Independent reference implementations used only by tests. They rely on
// Boost.Math (different code paths from the library) and brute force.

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace oracle {

inline double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::sqrt(2.0)); }

inline double normal_sf(double z) { return 0.5 * boost::math::erfc(z / std::sqrt(2.0)); }

inline double normal_sf_ld(double z) {
  const long double x = static_cast<long double>(z) / std::sqrt(2.0L);
  return static_cast<double>(0.5L * boost::math::erfc(x));
}

inline double normal_upper_quantile(double p) {
  return boost::math::quantile(boost::math::complement(boost::math::normal(), p));
}

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

/// P(Z1 >= h, Z2 >= k) by nested adaptive Gauss-Kronrod integration of the
/// bivariate density, truncated at 9 standard deviations.
inline double bvn_upper_2d(double h, double k, double rho) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double kHi = 9.0;
  h = std::max(h, -kHi);
  k = std::max(k, -kHi);
  if (h >= kHi || k >= kHi) return 0.0;
  const double s = std::sqrt(1.0 - rho * rho);
  const double norm = 1.0 / (2.0 * M_PI * s);
  auto inner = [&](double x) {
    auto dens = [&](double y) {
      const double q = (x * x - 2.0 * rho * x * y + y * y) / (s * s);
      return norm * std::exp(-0.5 * q);
    };
    const double mid = std::clamp(rho * x, k, kHi);
    double v = 0.0;
    if (mid > k) v += gauss_kronrod<double, 61>::integrate(dens, k, mid, 15, 1e-14);
    if (mid < kHi) v += gauss_kronrod<double, 61>::integrate(dens, mid, kHi, 15, 1e-14);
    return v;
  };
  return gauss_kronrod<double, 61>::integrate(inner, h, kHi, 15, 1e-13);
}

inline double rho_tilde_2d(double t, double s, double rho) {
  return bvn_upper_2d(normal_upper_quantile(t), normal_upper_quantile(s), rho) - t * s;
}

struct NaiveBh {
  std::size_t r = 0;
  std::size_t v = 0;
  double tau = 0.0;
  std::vector<std::size_t> rejected;  // sorted indices
};

/// BH by the max-j definition with an explicit sort; thresholds use the same
/// expression j*q/m.
inline NaiveBh naive_bh(std::span<const double> p, std::span<const std::uint8_t> h, double q) {
  const std::size_t m = p.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  NaiveBh out;
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[idx[j - 1]] <= static_cast<double>(j) * q / static_cast<double>(m)) out.r = j;
  }
  if (out.r == 0) return out;
  out.tau = p[idx[out.r - 1]];
  for (std::size_t i = 0; i < m; ++i) {
    if (p[i] <= out.tau) {
      out.rejected.push_back(i);
      if (h[i] == 0) ++out.v;
    }
  }
  return out;
}

/// Root of t/q = pi0 t + pi1 sf(sf^{-1}(t) - mu) by bisection.
inline double simes_no_factor(double pi1, double mu, double q) {
  auto psi = [&](double t) {
    return (1.0 - pi1) * t + pi1 * normal_sf(normal_upper_quantile(t) - mu) - t / q;
  };
  auto tol = [](double a, double b) { return std::fabs(b - a) <= 1e-16; };
  const auto r = boost::math::tools::bisect(psi, 1e-12, q * (1.0 - 1e-12), tol);
  return 0.5 * (r.first + r.second);
}

}  // namespace oracle
