#include "fdpburst/gauss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "fdpburst/error.hpp"

namespace fdpburst::gauss {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wichura (1988), algorithm AS 241, PPND16. Relative accuracy about 1e-16
// before refinement.
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        ((((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
               6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
             1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
           1.3314166789178437745e+2) * r + 3.3871328727963666080e+0));
    const double den =
        ((((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
               3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
             5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
           4.2313330701600911252e+1) * r + 1.0));
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

// Gauss-Legendre half-rules (6, 12 and 20 points) on [-1, 1], as used by
// Drezner-Wesolowsky / Genz bivariate normal integration.
struct LegendreRule {
  int n;
  std::array<double, 10> x;
  std::array<double, 10> w;
};

constexpr std::array<LegendreRule, 3> kRules{{
    {3,
     {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970},
     {0.1713244923791705, 0.3607615730481384, 0.4679139345726904}},
    {6,
     {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
      -0.5873179542866171, -0.3678314989981802, -0.1252334085114692},
     {0.4717533638651177e-1, 0.1069393259953183, 0.1600783285433464,
      0.2031674267230659, 0.2334925365383547, 0.2491470458134029}},
    {10,
     {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
      -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
      -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
      -0.7652652113349733e-1},
     {0.1761400713915212e-1, 0.4060142980038694e-1, 0.6267204833410906e-1,
      0.8327674157670475e-1, 0.1019301198172404, 0.1181945319615184,
      0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
      0.1527533871307259}},
}};

const LegendreRule& rule_for(double rho) {
  const double a = std::fabs(rho);
  if (a < 0.3) return kRules[0];
  if (a < 0.75) return kRules[1];
  return kRules[2];
}

// (1/2pi) * integral_0^{asin rho} exp(-(h^2 + k^2 - 2hk sin th) / (2 cos^2 th)) dth,
// which equals P(Z1 >= h, Z2 >= k) - sf(h) sf(k). Valid for |rho| < 0.925.
double orthant_excess(double h, double k, double rho) {
  const LegendreRule& rule = rule_for(rho);
  const double hk = h * k;
  const double hs = (h * h + k * k) / 2.0;
  const double asr = std::asin(rho);
  double sum = 0.0;
  for (int i = 0; i < rule.n; ++i) {
    double sn = std::sin(asr * (rule.x[i] + 1.0) / 2.0);
    sum += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    sn = std::sin(asr * (-rule.x[i] + 1.0) / 2.0);
    sum += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
  }
  return sum * asr / (2.0 * kTwoPi);
}

// Genz's high-correlation branch (|rho| >= 0.925) of BVNU.
double bvn_upper_high_corr(double h, double k, double rho) {
  const LegendreRule& rule = rule_for(rho);
  double hk = h * k;
  if (rho < 0.0) {
    k = -k;
    hk = -hk;
  }
  double bvn = 0.0;
  if (std::fabs(rho) < 1.0) {
    const double as = (1.0 - rho) * (1.0 + rho);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * std_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < rule.n; ++i) {
      for (double sign : {1.0, -1.0}) {
        const double xs = std::pow(a * (sign * rule.x[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        const double expo = -(bs / xs + hk) / 2.0;
        if (expo > -100.0) {
          bvn += a * rule.w[i] * std::exp(expo) *
                 (std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / kTwoPi;
  }
  if (rho > 0.0) {
    bvn += std_cdf(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) {
      if (h < 0.0) {
        bvn += std_cdf(k) - std_cdf(h);
      } else {
        bvn += std_cdf(-h) - std_cdf(-k);
      }
    }
  }
  return std::max(bvn, 0.0);
}

}  // namespace

double std_pdf(double z) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double std_cdf(double z) noexcept { return 0.5 * std::erfc(-z * kInvSqrt2); }

double std_sf(double z) noexcept { return 0.5 * std::erfc(z * kInvSqrt2); }

double std_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_quantile: p must lie in (0, 1)");
  }
  double z = ppnd16(p);
  // One Halley step. The residual is formed on the side of the median where
  // it is representable without cancellation.
  const double resid = p < 0.5 ? std_cdf(z) - p : (1.0 - p) - std_sf(z);
  const double u = resid / std_pdf(z);
  if (std::isfinite(u)) {
    z -= u / (1.0 + 0.5 * z * u);
  }
  return z;
}

double std_upper_quantile(double p) { return -std_quantile(p); }

double bvn_upper(double h, double k, double rho) {
  if (std::isnan(h) || std::isnan(k) || !(rho >= -1.0 && rho <= 1.0)) {
    throw DomainError("bvn_upper: invalid arguments");
  }
  if (h == std::numeric_limits<double>::infinity() ||
      k == std::numeric_limits<double>::infinity()) {
    return 0.0;
  }
  if (h == -std::numeric_limits<double>::infinity()) return std_sf(k);
  if (k == -std::numeric_limits<double>::infinity()) return std_sf(h);
  if (std::fabs(rho) < 0.925) {
    return std::max(std_sf(h) * std_sf(k) + orthant_excess(h, k, rho), 0.0);
  }
  return bvn_upper_high_corr(h, k, rho);
}

double rho_tilde(double t, double s, double rho) {
  if (!(t >= 0.0 && t <= 1.0) || !(s >= 0.0 && s <= 1.0) ||
      !(rho >= -1.0 && rho <= 1.0)) {
    throw DomainError("rho_tilde: requires t, s in [0,1] and rho in [-1,1]");
  }
  if (t == 0.0 || s == 0.0 || t == 1.0 || s == 1.0) return 0.0;
  // Canonical argument order makes the result exactly symmetric.
  if (s < t) std::swap(t, s);
  constexpr double kNearOne = 1.0 - 1e-12;
  if (rho >= kNearOne) return t - t * s;
  if (rho <= -kNearOne) return std::max(t + s - 1.0, 0.0) - t * s;
  const double h = std_upper_quantile(t);
  const double k = std_upper_quantile(s);
  if (std::fabs(rho) < 0.925) {
    return orthant_excess(h, k, rho);
  }
  return bvn_upper_high_corr(h, k, rho) - t * s;
}

}  // namespace fdpburst::gauss
