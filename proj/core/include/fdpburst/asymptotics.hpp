#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fdpburst/model.hpp"

namespace fdpburst {

/// Limiting subdistribution functions conditional on W = w.
///
/// For loading group j and r in {0, 1}:
///   gamma_jr(t) = sf((sf^{-1}(t) - mu_A r - l_j' w) / sqrt(1 - ||l_j||^2)),
///   F_r(t)      = pi_r sum_j omega_j gamma_jr(t),
///   G(t)        = F_0(t) + F_1(t).
class LimitFunctions {
 public:
  LimitFunctions(const LoadingGroups& loadings, std::span<const double> w, double mu_a,
                 double pi1_limit);

  std::size_t group_count() const { return weight_.size(); }
  double weight(std::size_t j) const { return weight_[j]; }
  double pi(int r) const { return r == 0 ? 1.0 - pi1_ : pi1_; }
  double mu_a() const { return mu_a_; }

  /// gamma_jr(t) for t in [0, 1]; exactly 0 at t = 0 and 1 at t = 1.
  double gamma(std::size_t j, int r, double t) const;
  /// Analytic derivative; throws DomainError unless 0 < t < 1.
  double gamma_prime(std::size_t j, int r, double t) const;

  double F(int r, double t) const;
  double F_prime(int r, double t) const;
  double G(double t) const;
  double G_prime(double t) const;

 private:
  double gamma_at(std::size_t j, int r, double u) const;

  std::vector<double> weight_;
  std::vector<double> shift_;  // l_j' w
  std::vector<double> scale_;  // sqrt(1 - ||l_j||^2)
  double mu_a_;
  double pi1_;
};

enum class Regime { clt, degenerate_tau_zero };

std::string to_string(Regime r);

struct SimesOptions {
  std::size_t n_grid = 20000;
  double t_floor = 1e-10;
  double tolerance = 1e-13;
};

struct SimesCrossing {
  double t = 0.0;
  /// -1: G falls below the Simes line; +1: G rises back above it.
  int direction = 0;
};

struct SimesResult {
  double tau_star = 0.0;
  Regime regime = Regime::degenerate_tau_zero;
  std::vector<SimesCrossing> crossings;
  /// Grid points where G - t/q has a local extremum within 1e-9 of zero
  /// without changing sign.
  std::vector<double> tangencies;
  std::size_t grid_size = 0;
};

/// Simes point tau* = sup{t in (0,1) : G(t) >= t/q}, found as the last
/// downward sign change of G(t) - t/q on a log-spaced grid over [t_floor, q]
/// (plus a uniform backup grid), refined by bisection. If G stays below the
/// line everywhere the regime is degenerate and tau* = 0.
SimesResult simes_point(const LimitFunctions& limits, double q, const SimesOptions& opts = {});

struct KernelValues {
  double c00 = 0.0;
  double c11 = 0.0;
  double c10 = 0.0;
  /// True when the cross part is a finite-m double sum rather than a limit.
  bool finite_m = false;
};

/// Covariance kernel c^(r0,r1)(tau, tau) = diagonal part + cross part.
///
/// Cross parts: independent -> 0; block -> (s_B - 1) E_j[rho_tilde] when
/// every block is homogeneous in loading group at m, otherwise the exact
/// finite-m block sum; toeplitz -> 2 sum_l E_j[rho_tilde(., ., rho_l)];
/// custom -> (1/m) sum_{i != j} rho_tilde(., ., Gamma_ij) at the given m.
KernelValues kernel_at_tau(const LimitFunctions& limits, const LoadingGroups& loadings,
                           const NoiseSpec& noise, std::size_t m, double tau);

struct AsymptoticSummary {
  double q = 0.0;
  double pi1_limit = 0.0;
  double tau_star = 0.0;
  Regime regime = Regime::degenerate_tau_zero;
  double f0_at_tau = 0.0;
  double f0_prime_at_tau = 0.0;
  double g_prime_at_tau = 0.0;
  double c_g = 0.0;  // 1/q - G'(tau*)
  double alpha = 0.0;
  double beta = 0.0;
  double c00 = 0.0;
  double c11 = 0.0;
  double c10 = 0.0;
  double kernel_min_eigenvalue = 0.0;
  double sigma_L_sq = 0.0;
  double sigma_R_sq = 0.0;
  double fdp_limit = 0.0;
  double fpr_limit = 0.0;
  bool sparse = false;             // pi1 limit is zero
  bool variance_reliable = false;  // clt regime and c_G above the tangency threshold
  bool kernel_finite_m = false;
  std::vector<SimesCrossing> crossings;
  std::vector<double> tangencies;
  std::vector<std::string> warnings;
};

inline constexpr double kNearTangencyThreshold = 1e-6;

/// Conditional limits for the configuration at W = w: Simes point, alpha,
/// beta, kernel values and the CLT variances for the FDP and V/m. For a
/// sparse schedule (pi1 -> 0) alpha = -1, c11 = c10 = 0, F_0(tau*) = tau*/q
/// and sigma_R^2 = (1 - q G'(tau*))^-2 c00. In the degenerate regime only
/// tau* = 0 and fpr_limit = 0 are meaningful; variance fields are NaN.
AsymptoticSummary analyze(const ExperimentConfig& config, std::span<const double> w,
                          const SimesOptions& opts = {});

/// sigma_L^2 = (q/tau)^2 ((1+a)^2 c00 + a^2 c11 + 2a(1+a) c10).
double fdp_variance(double q, double tau, double alpha, const KernelValues& k);
/// sigma_R^2 = (1+b)^2 c00 + b^2 c11 + 2b(1+b) c10.
double fpr_variance(double beta, const KernelValues& k);

}  // namespace fdpburst
