#pragma once

#include <cstdint>
#include <vector>

#include "fdpburst/model.hpp"
#include "fdpburst/rng.hpp"

namespace fdpburst {

/// One realization of the two-group factor model.
struct ReplicateDraw {
  std::vector<std::uint8_t> h;  // 1 = nonnull
  std::vector<double> w;        // latent factor (fixed in conditional mode)
  std::vector<double> x;        // test statistics
  std::vector<double> p;        // one-sided p-values sf(x); empty if not requested
  std::vector<double> scratch;  // reused noise workspace
};

/// Precomputed sampling plan for one configuration.
///
/// Test statistics are x_i = mu_A h_i + l_g(i)' w + sqrt(1 - ||l_g(i)||^2) e_i
/// where e has unit variances and the correlation of the NoiseSpec. Every
/// draw is a pure function of (seed, replicate): three Philox streams are
/// used, one each for h, w and e.
class Sampler {
 public:
  /// Validates the configuration (throws ConfigError) and factorizes the
  /// noise correlation once.
  explicit Sampler(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  std::size_t m() const { return config_.m; }
  double pi1() const { return pi1_; }
  const std::vector<std::uint32_t>& groups() const { return groups_; }

  /// Fills h, w and x. Does not compute p-values.
  void draw_statistics(std::uint64_t replicate, ReplicateDraw& out) const;

  /// Fills h, w, x and p.
  void draw(std::uint64_t replicate, ReplicateDraw& out) const;
  ReplicateDraw draw(std::uint64_t replicate) const;

  /// Standardized noise e (unit variances) for a replicate; exposed so the
  /// correlation structure can be checked directly.
  void draw_noise(std::uint64_t replicate, std::vector<double>& e,
                  std::vector<double>& scratch) const;

 private:
  void draw_block_noise(PhiloxStream& rng, std::vector<double>& e) const;

  ExperimentConfig config_;
  double pi1_ = 0.0;
  std::vector<std::uint32_t> groups_;
  std::vector<double> group_scale_;       // sqrt(1 - ||l_j||^2)
  std::vector<double> group_shift_fixed_;  // l_j' w in conditional mode
  std::vector<double> band_factor_;        // toeplitz banded Cholesky
  std::vector<double> block_factor_full_;  // block (rho < 0): dense lower factor
  std::vector<double> block_factor_tail_;
  std::vector<double> dense_factor_;       // custom: dense lower factor
};

/// Convenience wrapper: builds a Sampler and draws one replicate.
ReplicateDraw draw_replicate(const ExperimentConfig& config, std::uint64_t replicate_index);

}  // namespace fdpburst
