#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fdpburst {

/// Probability that a hypothesis is nonnull, as a function of m.
struct NonnullSchedule {
  enum class Kind { fixed, power_law };

  Kind kind = Kind::fixed;
  double pi1 = 0.1;  // fixed
  double c = 1.0;    // power_law: pi1(m) = c * m^-a
  double a = 0.0;

  static NonnullSchedule fixed(double pi1);
  static NonnullSchedule power_law(double c, double a);

  /// pi1 at m hypotheses, clipped to [1e-12, 1 - 1e-12].
  double at(std::size_t m) const;

  /// Limiting nonnull probability: pi1 when fixed or a == 0, else 0.
  double limit() const;
};

inline constexpr double kPi1Floor = 1e-12;

struct LoadingGroup {
  double weight = 1.0;
  std::vector<double> loading;

  double norm_sq() const;
};

/// Finitely many loading vectors with limiting mixture weights. Hypothesis i
/// of m is mapped to a group by assign_groups().
struct LoadingGroups {
  std::vector<LoadingGroup> groups;
  std::size_t k = 0;
  /// Groups tied to one finite matrix (one group per fitted row). Limits are
  /// only meaningful through row replication.
  bool finite_m = false;

  /// A single group with an empty loading: no factor component.
  static LoadingGroups none();
  static LoadingGroups single(std::vector<double> loading);

  std::size_t size() const { return groups.size(); }
  /// S_L = max_j ||l_j||^2.
  double max_norm_sq() const;
};

/// Correlation structure of the standardized noise.
struct NoiseSpec {
  enum class Kind { independent, block, toeplitz, custom };

  Kind kind = Kind::independent;
  std::size_t block_size = 1;
  double block_rho = 0.0;
  std::vector<double> band;         // toeplitz: rho_1..rho_M
  std::size_t custom_dim = 0;       // custom: Gamma is custom_dim x custom_dim
  std::vector<double> custom;       // row-major

  static NoiseSpec independent();
  static NoiseSpec block(std::size_t size, double rho);
  static NoiseSpec toeplitz(std::vector<double> band);
  static NoiseSpec custom_matrix(std::size_t dim, std::vector<double> row_major);

  double custom_at(std::size_t i, std::size_t j) const { return custom[i * custom_dim + j]; }
};

enum class LatentMode { conditional, marginal };

struct ExperimentConfig {
  std::size_t m = 1000;
  NonnullSchedule schedule;
  double mu_a = 2.0;
  double q = 0.1;
  LoadingGroups loadings = LoadingGroups::none();
  NoiseSpec noise;
  LatentMode latent_mode = LatentMode::conditional;
  std::vector<double> w;  // conditional mode; size k
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
};

/// Largest-remainder apportionment of m hypotheses to loading groups.
/// Returns 0-based group indices, hypotheses ordered by group. Ties in the
/// fractional remainder go to the lower group index.
std::vector<std::uint32_t> assign_groups(std::size_t m, const LoadingGroups& loadings);

/// Per-group hypothesis counts produced by assign_groups().
std::vector<std::size_t> group_counts(std::size_t m, const LoadingGroups& loadings);

enum class CheckStatus { pass, fail, not_checkable, deferred };

std::string to_string(CheckStatus s);

struct ConditionCheck {
  std::string id;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConditionCheck> checks;

  bool ok() const;
  const ConditionCheck* find(const std::string& id) const;
  /// Throws ConfigError naming the first failed check.
  void throw_if_failed() const;
};

/// Structural checks of the configuration: parameter invariants, noise
/// positive-definiteness, and the testable parts of the regularity
/// conditions (mixing via M-dependence, bounded loadings, existence of
/// limits). Conditions depending on w are reported as deferred.
ValidationReport validate(const ExperimentConfig& config);

/// validate() followed by throw_if_failed().
void require_valid(const ExperimentConfig& config);

/// Lower banded Cholesky factor of the m x m Toeplitz correlation matrix with
/// unit diagonal and off-diagonals band[0..M-1]. Row i stores L(i, i-M..i) in
/// out[i*(M+1) .. i*(M+1)+M]; entries before column 0 are zero. Throws
/// ConfigError if the matrix is not positive semidefinite.
std::vector<double> toeplitz_band_cholesky(std::span<const double> band, std::size_t m);

}  // namespace fdpburst
