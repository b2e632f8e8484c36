#include "fdpburst/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "fdpburst/error.hpp"
#include "fdpburst/gauss.hpp"

namespace fdpburst {

using gauss::rho_tilde;
using gauss::std_sf;
using gauss::std_upper_quantile;

LimitFunctions::LimitFunctions(const LoadingGroups& loadings, std::span<const double> w,
                               double mu_a, double pi1_limit)
    : mu_a_(mu_a), pi1_(pi1_limit) {
  if (w.size() != loadings.k) {
    throw ConfigError("latent factor w must have dimension k");
  }
  const std::size_t J = loadings.groups.size();
  weight_.resize(J);
  shift_.resize(J);
  scale_.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const auto& g = loadings.groups[j];
    weight_[j] = g.weight;
    shift_[j] = std::inner_product(g.loading.begin(), g.loading.end(), w.begin(), 0.0);
    scale_[j] = std::sqrt(1.0 - g.norm_sq());
  }
}

double LimitFunctions::gamma_at(std::size_t j, int r, double u) const {
  return std_sf((u - mu_a_ * r - shift_[j]) / scale_[j]);
}

double LimitFunctions::gamma(std::size_t j, int r, double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return gamma_at(j, r, std_upper_quantile(t));
}

double LimitFunctions::gamma_prime(std::size_t j, int r, double t) const {
  if (!(t > 0.0 && t < 1.0)) {
    throw DomainError("gamma_prime: t must lie in (0, 1)");
  }
  const double u = std_upper_quantile(t);
  const double z = (u - mu_a_ * r - shift_[j]) / scale_[j];
  // phi(z) / (phi(u) * scale), formed as one exponential.
  return std::exp(-0.5 * (z - u) * (z + u)) / scale_[j];
}

double LimitFunctions::F(int r, double t) const {
  if (pi(r) == 0.0) return 0.0;
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return pi(r);
  const double u = std_upper_quantile(t);
  double s = 0.0;
  for (std::size_t j = 0; j < weight_.size(); ++j) s += weight_[j] * gamma_at(j, r, u);
  return pi(r) * s;
}

double LimitFunctions::F_prime(int r, double t) const {
  if (!(t > 0.0 && t < 1.0)) {
    throw DomainError("F_prime: t must lie in (0, 1)");
  }
  if (pi(r) == 0.0) return 0.0;
  const double u = std_upper_quantile(t);
  double s = 0.0;
  for (std::size_t j = 0; j < weight_.size(); ++j) {
    const double z = (u - mu_a_ * r - shift_[j]) / scale_[j];
    s += weight_[j] * std::exp(-0.5 * (z - u) * (z + u)) / scale_[j];
  }
  return pi(r) * s;
}

double LimitFunctions::G(double t) const { return F(0, t) + F(1, t); }

double LimitFunctions::G_prime(double t) const { return F_prime(0, t) + F_prime(1, t); }

std::string to_string(Regime r) {
  return r == Regime::clt ? "clt" : "degenerate_tau_zero";
}

namespace {

std::vector<double> simes_grid(double t_floor, double q, std::size_t n) {
  std::vector<double> grid;
  grid.reserve(n + n / 10 + 2);
  const double lo = std::log(t_floor);
  const double hi = std::log(q);
  for (std::size_t i = 0; i < n; ++i) {
    grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  const std::size_t nu = std::max<std::size_t>(n / 10, 2);
  for (std::size_t i = 1; i <= nu; ++i) {
    grid.push_back(q * static_cast<double>(i) / static_cast<double>(nu));
  }
  grid.back() = q;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.erase(std::remove_if(grid.begin(), grid.end(), [&](double t) { return t < t_floor || t > q; }),
             grid.end());
  return grid;
}

struct Scan {
  std::vector<double> t;
  std::vector<double> psi;
};

Scan scan(const LimitFunctions& lf, double q, const SimesOptions& opts, std::size_t n) {
  Scan s;
  s.t = simes_grid(opts.t_floor, q, n);
  s.psi.resize(s.t.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    s.psi[i] = lf.G(s.t[i]) - s.t[i] / q;
    if (std::isnan(s.psi[i])) {
      std::ostringstream msg;
      msg << "G(t) - t/q is NaN at t=" << s.t[i];
      throw SolverError(msg.str());
    }
  }
  return s;
}

double bisect(const LimitFunctions& lf, double q, double lo, double hi, double tol) {
  auto psi = [&](double t) { return lf.G(t) - t / q; };
  if (!(psi(lo) >= 0.0 && psi(hi) < 0.0)) {
    throw SolverError("Simes bisection lost its bracket");
  }
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = psi(mid);
    if (std::isnan(v)) throw SolverError("G(t) - t/q is NaN during bisection");
    if (v >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

SimesResult simes_point(const LimitFunctions& lf, double q, const SimesOptions& opts) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("simes_point: q must lie in (0, 1)");
  if (opts.n_grid < 2) throw DomainError("simes_point: grid needs at least 2 points");

  SimesResult res;
  std::size_t n = opts.n_grid;
  for (int attempt = 0; attempt < 3; ++attempt, n *= 2) {
    const Scan s = scan(lf, q, opts, n);
    res.grid_size = s.t.size();
    res.crossings.clear();
    res.tangencies.clear();
    std::ptrdiff_t last_down = -1;
    double max_psi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      max_psi = std::max(max_psi, s.psi[i]);
      if (i + 1 < s.t.size()) {
        const bool here = s.psi[i] >= 0.0;
        const bool next = s.psi[i + 1] >= 0.0;
        if (here && !next) {
          res.crossings.push_back({s.t[i], -1});
          last_down = static_cast<std::ptrdiff_t>(i);
        } else if (!here && next) {
          res.crossings.push_back({s.t[i + 1], +1});
        }
      }
      if (i > 0 && i + 1 < s.t.size()) {
        const double a = s.psi[i - 1], b = s.psi[i], c = s.psi[i + 1];
        const bool extremum = (b > a && b > c) || (b < a && b < c);
        if (extremum && std::fabs(b) <= 1e-9 * std::max(s.t[i] / q, 1e-300) &&
            ((b < 0.0 && a < 0.0 && c < 0.0) || (b >= 0.0 && a >= 0.0 && c >= 0.0))) {
          res.tangencies.push_back(s.t[i]);
        }
      }
    }

    if (s.psi.back() >= 0.0) {
      // G(q) = 1: the line leaves the unit square at q.
      res.tau_star = q;
      res.regime = Regime::clt;
      return res;
    }
    if (last_down >= 0) {
      const auto i = static_cast<std::size_t>(last_down);
      res.tau_star = bisect(lf, q, s.t[i], s.t[i + 1], opts.tolerance);
      // Earlier crossings stay at grid resolution.
      for (auto& c : res.crossings) {
        if (c.direction == -1 && c.t == s.t[i]) c.t = res.tau_star;
      }
      res.regime = Regime::clt;
      return res;
    }
    // No crossing. Refine only if the curve came close to the line.
    const bool near = max_psi > -1e-6 * q;
    if (!near) break;
  }
  res.tau_star = 0.0;
  res.regime = Regime::degenerate_tau_zero;
  return res;
}

namespace {

// rho_tilde(gamma_j r0(tau), gamma_j r1(tau), rho) averaged over groups with
// the given weights.
double mean_rho_tilde(const std::vector<double>& g0, const std::vector<double>& g1,
                      const std::vector<double>& wts, double rho) {
  double s = 0.0;
  for (std::size_t j = 0; j < wts.size(); ++j) s += wts[j] * rho_tilde(g0[j], g1[j], rho);
  return s;
}

// Pairwise (tree) summation for a deterministic, well-conditioned total.
double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

bool blocks_homogeneous(const std::vector<std::size_t>& counts, std::size_t block, std::size_t m) {
  std::size_t boundary = 0;
  for (std::size_t j = 0; j + 1 < counts.size(); ++j) {
    boundary += counts[j];
    if (boundary != 0 && boundary != m && boundary % block != 0) return false;
  }
  return true;
}

}  // namespace

KernelValues kernel_at_tau(const LimitFunctions& lf, const LoadingGroups& loadings,
                           const NoiseSpec& noise, std::size_t m, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("kernel_at_tau: tau must lie in (0, 1)");
  const std::size_t J = lf.group_count();
  std::vector<double> g0(J), g1(J), wts(J);
  for (std::size_t j = 0; j < J; ++j) {
    g0[j] = lf.gamma(j, 0, tau);
    g1[j] = lf.gamma(j, 1, tau);
    wts[j] = lf.weight(j);
  }
  const double p0 = lf.pi(0);
  const double p1 = lf.pi(1);

  const bool use_counts = noise.kind == NoiseSpec::Kind::custom;
  std::vector<double> diag_w = wts;
  std::vector<std::size_t> counts;
  if (use_counts || noise.kind == NoiseSpec::Kind::block) counts = group_counts(m, loadings);
  if (use_counts) {
    for (std::size_t j = 0; j < J; ++j) {
      diag_w[j] = static_cast<double>(counts[j]) / static_cast<double>(m);
    }
  }

  KernelValues k;
  for (std::size_t j = 0; j < J; ++j) {
    k.c00 += diag_w[j] * (p0 * g0[j] - p0 * p0 * g0[j] * g0[j]);
    k.c11 += diag_w[j] * (p1 * g1[j] - p1 * p1 * g1[j] * g1[j]);
    k.c10 += diag_w[j] * (-p1 * p0 * g1[j] * g0[j]);
  }

  switch (noise.kind) {
    case NoiseSpec::Kind::independent:
      break;
    case NoiseSpec::Kind::block: {
      const std::size_t sb = noise.block_size;
      const double rho = noise.block_rho;
      if (sb <= 1) break;
      if (J == 1 || blocks_homogeneous(counts, sb, m)) {
        const double f = static_cast<double>(sb - 1);
        k.c00 += p0 * p0 * f * mean_rho_tilde(g0, g0, wts, rho);
        k.c11 += p1 * p1 * f * mean_rho_tilde(g1, g1, wts, rho);
        k.c10 += p1 * p0 * f * mean_rho_tilde(g1, g0, wts, rho);
      } else {
        // Exact finite-m sum over ordered within-block pairs, grouped by
        // (group a, group b) multiplicities.
        k.finite_m = true;
        const auto assign = assign_groups(m, loadings);
        double s00 = 0.0, s11 = 0.0, s10 = 0.0;
        for (std::size_t start = 0; start < m; start += sb) {
          const std::size_t end = std::min(start + sb, m);
          std::map<std::uint32_t, std::size_t> mult;
          for (std::size_t i = start; i < end; ++i) ++mult[assign[i]];
          for (const auto& [a, na] : mult) {
            for (const auto& [b, nb] : mult) {
              const double pairs =
                  static_cast<double>(na) * static_cast<double>(nb) - (a == b ? static_cast<double>(na) : 0.0);
              if (pairs == 0.0) continue;
              s00 += pairs * rho_tilde(g0[a], g0[b], rho);
              s11 += pairs * rho_tilde(g1[a], g1[b], rho);
              s10 += pairs * rho_tilde(g1[a], g0[b], rho);
            }
          }
        }
        const double inv_m = 1.0 / static_cast<double>(m);
        k.c00 += p0 * p0 * s00 * inv_m;
        k.c11 += p1 * p1 * s11 * inv_m;
        k.c10 += p1 * p0 * s10 * inv_m;
      }
      break;
    }
    case NoiseSpec::Kind::toeplitz: {
      double s00 = 0.0, s11 = 0.0, s10 = 0.0;
      for (double rho : noise.band) {
        s00 += mean_rho_tilde(g0, g0, wts, rho);
        s11 += mean_rho_tilde(g1, g1, wts, rho);
        s10 += mean_rho_tilde(g1, g0, wts, rho);
      }
      k.c00 += p0 * p0 * 2.0 * s00;
      k.c11 += p1 * p1 * 2.0 * s11;
      k.c10 += p1 * p0 * 2.0 * s10;
      break;
    }
    case NoiseSpec::Kind::custom: {
      if (noise.custom_dim != m) throw ConfigError("custom correlation matrix must be m x m");
      k.finite_m = true;
      const auto assign = assign_groups(m, loadings);
      std::vector<double> r00(m, 0.0), r11(m, 0.0), r10(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        double a00 = 0.0, a11 = 0.0, a10 = 0.0;
        const std::uint32_t gi = assign[i];
        for (std::size_t j = 0; j < m; ++j) {
          if (j == i) continue;
          const double rho = noise.custom_at(i, j);
          if (std::fabs(rho) < 1e-12) continue;
          const std::uint32_t gj = assign[j];
          a00 += rho_tilde(g0[gi], g0[gj], rho);
          a11 += rho_tilde(g1[gi], g1[gj], rho);
          a10 += rho_tilde(g1[gi], g0[gj], rho);
        }
        r00[i] = a00;
        r11[i] = a11;
        r10[i] = a10;
      }
      const double inv_m = 1.0 / static_cast<double>(m);
      k.c00 += p0 * p0 * pairwise_sum(r00) * inv_m;
      k.c11 += p1 * p1 * pairwise_sum(r11) * inv_m;
      k.c10 += p1 * p0 * pairwise_sum(r10) * inv_m;
      break;
    }
  }
  return k;
}

double fdp_variance(double q, double tau, double alpha, const KernelValues& k) {
  const double a1 = 1.0 + alpha;
  return (q * q) / (tau * tau) *
         (a1 * a1 * k.c00 + alpha * alpha * k.c11 + 2.0 * alpha * a1 * k.c10);
}

double fpr_variance(double beta, const KernelValues& k) {
  const double b1 = 1.0 + beta;
  return b1 * b1 * k.c00 + beta * beta * k.c11 + 2.0 * beta * b1 * k.c10;
}

AsymptoticSummary analyze(const ExperimentConfig& config, std::span<const double> w,
                          const SimesOptions& opts) {
  ExperimentConfig checked = config;
  checked.latent_mode = LatentMode::conditional;
  checked.w.assign(w.begin(), w.end());
  require_valid(checked);

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  AsymptoticSummary out;
  out.q = config.q;
  out.pi1_limit = config.schedule.limit();
  out.sparse = out.pi1_limit == 0.0;
  if (config.schedule.kind == NonnullSchedule::Kind::power_law && config.schedule.a > 0.0 &&
      config.schedule.a <= 0.5) {
    out.warnings.push_back(
        "power-law exponent a <= 1/2: sparse-limit formulas are used although pi1 is not "
        "o(m^-1/2)");
  }

  const LimitFunctions lf(config.loadings, w, config.mu_a, out.pi1_limit);
  const SimesResult simes = simes_point(lf, config.q, opts);
  out.tau_star = simes.tau_star;
  out.regime = simes.regime;
  out.crossings = simes.crossings;
  out.tangencies = simes.tangencies;
  if (!simes.tangencies.empty()) {
    out.warnings.push_back("G touches the Simes line without crossing; see tangencies");
  }

  if (simes.regime == Regime::degenerate_tau_zero) {
    out.f0_at_tau = 0.0;
    out.fpr_limit = 0.0;
    out.fdp_limit = kNaN;
    out.f0_prime_at_tau = out.g_prime_at_tau = out.c_g = kNaN;
    out.alpha = out.beta = kNaN;
    out.c00 = out.c11 = out.c10 = out.kernel_min_eigenvalue = kNaN;
    out.sigma_L_sq = out.sigma_R_sq = kNaN;
    out.variance_reliable = false;
    return out;
  }

  const double tau = out.tau_star;
  const double q = config.q;
  out.f0_at_tau = lf.F(0, tau);
  out.f0_prime_at_tau = lf.F_prime(0, tau);
  out.g_prime_at_tau = lf.G_prime(tau);
  out.c_g = 1.0 / q - out.g_prime_at_tau;
  out.alpha = (out.f0_prime_at_tau - out.f0_at_tau / tau) / out.c_g;
  out.beta = out.f0_prime_at_tau / out.c_g;

  KernelValues k = kernel_at_tau(lf, config.loadings, config.noise, config.m, tau);
  if (out.sparse) {
    out.alpha = -1.0;
    out.f0_at_tau = tau / q;
    k.c11 = 0.0;
    k.c10 = 0.0;
  }
  out.c00 = k.c00;
  out.c11 = k.c11;
  out.c10 = k.c10;
  out.kernel_finite_m = k.finite_m;
  {
    const double tr = k.c00 + k.c11;
    const double det = k.c00 * k.c11 - k.c10 * k.c10;
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    out.kernel_min_eigenvalue = tr / 2.0 - disc;
  }

  out.sigma_L_sq = fdp_variance(q, tau, out.alpha, k);
  if (out.sparse) {
    const double d = 1.0 - q * out.g_prime_at_tau;
    out.sigma_R_sq = k.c00 / (d * d);
    out.fdp_limit = 1.0;
    out.fpr_limit = tau / q;
  } else {
    out.sigma_R_sq = fpr_variance(out.beta, k);
    out.fdp_limit = q * out.f0_at_tau / tau;
    out.fpr_limit = out.f0_at_tau;
  }

  out.variance_reliable = out.c_g >= kNearTangencyThreshold;
  if (!out.variance_reliable) {
    std::ostringstream msg;
    msg << "near tangency at tau*: c_G = " << out.c_g << " < " << kNearTangencyThreshold
        << "; variance outputs unreliable";
    out.warnings.push_back(msg.str());
  }
  if (k.finite_m) {
    out.warnings.push_back("kernel cross term is a finite-m approximation");
  }
  return out;
}

}  // namespace fdpburst
