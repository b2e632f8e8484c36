#include "fdpburst/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fdpburst/error.hpp"

namespace fdpburst {

NonnullSchedule NonnullSchedule::fixed(double pi1) {
  NonnullSchedule s;
  s.kind = Kind::fixed;
  s.pi1 = pi1;
  return s;
}

NonnullSchedule NonnullSchedule::power_law(double c, double a) {
  NonnullSchedule s;
  s.kind = Kind::power_law;
  s.c = c;
  s.a = a;
  return s;
}

double NonnullSchedule::at(std::size_t m) const {
  const double raw =
      kind == Kind::fixed ? pi1 : c * std::pow(static_cast<double>(m), -a);
  return std::clamp(raw, kPi1Floor, 1.0 - kPi1Floor);
}

double NonnullSchedule::limit() const {
  if (kind == Kind::fixed) return std::clamp(pi1, kPi1Floor, 1.0 - kPi1Floor);
  if (a > 0.0) return 0.0;
  return std::clamp(c, kPi1Floor, 1.0 - kPi1Floor);
}

double LoadingGroup::norm_sq() const {
  return std::inner_product(loading.begin(), loading.end(), loading.begin(), 0.0);
}

LoadingGroups LoadingGroups::none() {
  LoadingGroups g;
  g.groups.push_back({1.0, {}});
  g.k = 0;
  return g;
}

LoadingGroups LoadingGroups::single(std::vector<double> loading) {
  LoadingGroups g;
  g.k = loading.size();
  g.groups.push_back({1.0, std::move(loading)});
  return g;
}

double LoadingGroups::max_norm_sq() const {
  double s = 0.0;
  for (const auto& g : groups) s = std::max(s, g.norm_sq());
  return s;
}

NoiseSpec NoiseSpec::independent() { return {}; }

NoiseSpec NoiseSpec::block(std::size_t size, double rho) {
  NoiseSpec n;
  n.kind = Kind::block;
  n.block_size = size;
  n.block_rho = rho;
  return n;
}

NoiseSpec NoiseSpec::toeplitz(std::vector<double> band) {
  NoiseSpec n;
  n.kind = Kind::toeplitz;
  n.band = std::move(band);
  return n;
}

NoiseSpec NoiseSpec::custom_matrix(std::size_t dim, std::vector<double> row_major) {
  NoiseSpec n;
  n.kind = Kind::custom;
  n.custom_dim = dim;
  n.custom = std::move(row_major);
  return n;
}

std::vector<std::size_t> group_counts(std::size_t m, const LoadingGroups& loadings) {
  const std::size_t J = loadings.groups.size();
  std::vector<std::size_t> counts(J, 0);
  std::vector<double> remainder(J, 0.0);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < J; ++j) {
    const double quota = loadings.groups[j].weight * static_cast<double>(m);
    const double fl = std::floor(quota);
    counts[j] = static_cast<std::size_t>(fl);
    remainder[j] = quota - fl;
    assigned += counts[j];
  }
  // Rounding of the weights can overshoot by a unit; trim from the back.
  for (std::size_t j = J; assigned > m && j-- > 0;) {
    const std::size_t take = std::min(counts[j], assigned - m);
    counts[j] -= take;
    assigned -= take;
  }
  std::vector<std::size_t> order(J);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return remainder[x] > remainder[y];
  });
  for (std::size_t r = 0; assigned < m; ++r) {
    ++counts[order[r % J]];
    ++assigned;
  }
  return counts;
}

std::vector<std::uint32_t> assign_groups(std::size_t m, const LoadingGroups& loadings) {
  const auto counts = group_counts(m, loadings);
  std::vector<std::uint32_t> out;
  out.reserve(m);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    out.insert(out.end(), counts[j], static_cast<std::uint32_t>(j));
  }
  return out;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_checkable: return "not-checkable";
    case CheckStatus::deferred: return "deferred";
  }
  return "unknown";
}

bool ValidationReport::ok() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const ConditionCheck& c) { return c.status == CheckStatus::fail; });
}

const ConditionCheck* ValidationReport::find(const std::string& id) const {
  for (const auto& c : checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

void ValidationReport::throw_if_failed() const {
  for (const auto& c : checks) {
    if (c.status == CheckStatus::fail) {
      throw ConfigError(c.id + ": " + c.detail);
    }
  }
}

std::vector<double> toeplitz_band_cholesky(std::span<const double> band, std::size_t m) {
  const std::size_t M = band.size();
  const std::size_t W = M + 1;
  std::vector<double> L(m * W, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return L[i * W + (M - (i - j))]; };
  auto gamma = [&](std::size_t i, std::size_t j) { return i == j ? 1.0 : band[i - j - 1]; };
  constexpr double kPivotTol = 1e-10;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i >= M ? i - M : 0;
    for (std::size_t j = lo; j <= i; ++j) {
      double s = gamma(i, j);
      const std::size_t klo = std::max(lo, j >= M ? j - M : 0);
      for (std::size_t k = klo; k < j; ++k) s -= at(i, k) * at(j, k);
      if (j == i) {
        if (s < -kPivotTol) {
          std::ostringstream msg;
          msg << "banded Toeplitz correlation is not positive semidefinite at m=" << m
              << " (pivot " << s << " at row " << i << ")";
          throw ConfigError(msg.str());
        }
        at(i, i) = s > 0.0 ? std::sqrt(s) : 0.0;
      } else {
        const double d = at(j, j);
        at(i, j) = d > 0.0 ? s / d : 0.0;
      }
    }
  }
  return L;
}

namespace {

void add(ValidationReport& r, std::string id, bool ok, std::string detail) {
  r.checks.push_back({std::move(id), ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail)});
}

bool custom_is_psd(const NoiseSpec& noise) {
  const auto n = static_cast<Eigen::Index>(noise.custom_dim);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> G(
      noise.custom.data(), n, n);
  Eigen::MatrixXd A = G;
  for (double jitter : {0.0, 1e-10}) {
    Eigen::LLT<Eigen::MatrixXd> llt(A + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return true;
  }
  return false;
}

std::size_t custom_bandwidth(const NoiseSpec& noise) {
  std::size_t bw = 0;
  const std::size_t n = noise.custom_dim;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (noise.custom_at(i, j) != 0.0) bw = std::max(bw, j - i);
    }
  }
  return bw;
}

void check_noise(const ExperimentConfig& cfg, ValidationReport& r) {
  const NoiseSpec& n = cfg.noise;
  switch (n.kind) {
    case NoiseSpec::Kind::independent:
      add(r, "noise_psd", true, "identity correlation");
      break;
    case NoiseSpec::Kind::block: {
      const bool size_ok = n.block_size >= 1;
      add(r, "noise_block_size", size_ok, "block size must be >= 1");
      const double lower =
          n.block_size > 1 ? -1.0 / static_cast<double>(n.block_size - 1) : -1.0;
      const bool rho_ok = n.block_rho > lower && n.block_rho < 1.0;
      std::ostringstream d;
      d << "block_rho=" << n.block_rho << " must lie in (" << lower << ", 1)";
      add(r, "noise_psd", rho_ok, d.str());
      break;
    }
    case NoiseSpec::Kind::toeplitz: {
      bool range_ok = true;
      for (double v : n.band) range_ok = range_ok && v > -1.0 && v < 1.0;
      add(r, "noise_band_range", range_ok, "Toeplitz band entries must lie in (-1, 1)");
      if (range_ok) {
        try {
          (void)toeplitz_band_cholesky(n.band, cfg.m);
          add(r, "noise_psd", true, "banded Cholesky succeeded");
        } catch (const ConfigError& e) {
          add(r, "noise_psd", false, e.what());
        }
      }
      break;
    }
    case NoiseSpec::Kind::custom: {
      const bool dim_ok =
          n.custom_dim == cfg.m && n.custom.size() == n.custom_dim * n.custom_dim;
      add(r, "noise_custom_dim", dim_ok, "custom correlation matrix must be m x m");
      if (!dim_ok) break;
      bool sym = true;
      bool unit = true;
      for (std::size_t i = 0; i < n.custom_dim; ++i) {
        unit = unit && n.custom_at(i, i) == 1.0;
        for (std::size_t j = i + 1; j < n.custom_dim; ++j) {
          sym = sym && n.custom_at(i, j) == n.custom_at(j, i);
        }
      }
      add(r, "noise_custom_shape", sym && unit, "custom matrix must be symmetric with unit diagonal");
      if (sym && unit) {
        add(r, "noise_psd", custom_is_psd(n), "Cholesky with jitter <= 1e-10");
      }
      break;
    }
  }
}

}  // namespace

ValidationReport validate(const ExperimentConfig& cfg) {
  ValidationReport r;
  add(r, "m", cfg.m >= 1, "m must be positive");
  add(r, "q", cfg.q > 0.0 && cfg.q < 1.0, "q must lie in (0, 1)");
  add(r, "mu_a", cfg.mu_a > 0.0 && std::isfinite(cfg.mu_a), "mu_a must be positive");
  add(r, "replicates", cfg.replicates >= 1, "replicates must be positive");

  const auto& s = cfg.schedule;
  if (s.kind == NonnullSchedule::Kind::fixed) {
    add(r, "schedule", s.pi1 > 0.0 && s.pi1 < 1.0, "fixed pi1 must lie in (0, 1)");
  } else {
    add(r, "schedule", s.c > 0.0 && s.a >= 0.0, "power law needs c > 0 and a >= 0");
  }

  const auto& L = cfg.loadings;
  bool groups_ok = !L.groups.empty();
  double wsum = 0.0;
  for (const auto& g : L.groups) {
    groups_ok = groups_ok && g.loading.size() == L.k && g.weight > 0.0 && g.weight <= 1.0;
    wsum += g.weight;
  }
  add(r, "loading_groups", groups_ok,
      "need >= 1 group, each with weight in (0, 1] and a loading of dimension k");
  add(r, "loading_weights", std::fabs(wsum - 1.0) <= 1e-12, "group weights must sum to 1");

  if (cfg.latent_mode == LatentMode::conditional) {
    add(r, "latent_dim", cfg.w.size() == L.k, "conditional mode requires w of dimension k");
  }

  check_noise(cfg, r);

  using K = NoiseSpec::Kind;
  const bool m_dependent = cfg.noise.kind != K::custom;
  if (m_dependent) {
    r.checks.push_back({"condition1", CheckStatus::pass, "noise is M-dependent"});
    r.checks.push_back({"condition2", CheckStatus::pass, "noise is M-dependent"});
  } else {
    std::ostringstream d;
    d << "custom correlation; bandwidth at this m is " << custom_bandwidth(cfg.noise)
      << ", growth with m not checkable";
    r.checks.push_back({"condition1", CheckStatus::not_checkable, d.str()});
    r.checks.push_back({"condition2", CheckStatus::not_checkable, d.str()});
  }

  const double sl = L.max_norm_sq();
  {
    std::ostringstream d;
    d << "S_L = " << sl << " (must be < 1)";
    add(r, "condition3", sl < 1.0, d.str());
  }
  const std::string lim_detail =
      L.finite_m ? "finite-m groups; limits realized by row replication"
                 : "finitely many loading groups with fixed weights";
  r.checks.push_back({"condition4", CheckStatus::pass, lim_detail});
  r.checks.push_back({"condition5", CheckStatus::deferred, "depends on w; checked by analyze"});
  if (m_dependent) {
    r.checks.push_back({"condition6", CheckStatus::pass, lim_detail + "; M-dependent noise"});
  } else {
    r.checks.push_back({"condition6", CheckStatus::not_checkable,
                        "cross-term limit not determined by a single finite matrix"});
  }
  r.checks.push_back({"condition7", CheckStatus::deferred, "depends on w; checked by analyze"});
  r.checks.push_back({"condition8", CheckStatus::pass, lim_detail});
  return r;
}

void require_valid(const ExperimentConfig& config) { validate(config).throw_if_failed(); }

}  // namespace fdpburst
