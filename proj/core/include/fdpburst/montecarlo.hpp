#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fdpburst/asymptotics.hpp"
#include "fdpburst/model.hpp"

namespace fdpburst {

struct ReplicateOutcome {
  std::uint64_t replicate = 0;
  std::size_t r = 0;
  std::size_t v = 0;
  double fdp = 0.0;
  double fpr = 0.0;
  double tau_bh = 0.0;
  std::vector<double> w;
};

struct ExperimentSummary {
  std::size_t replicates = 0;
  double fdr_hat = 0.0;  // mean FDP
  double fdr_se = 0.0;   // Monte Carlo standard error of fdr_hat
  /// Mean FDP over replicates with at least one rejection; absent if none.
  std::optional<double> pfdr_hat;
  std::size_t n_zero_rejection = 0;
  double fdp_mean = 0.0;
  double fdp_var = 0.0;  // sample variance (n - 1)
  double fpr_mean = 0.0;
  double fpr_var = 0.0;
  double fraction_any_rejection = 0.0;
  double fpr_max = 0.0;
};

/// Empirical moments of sqrt(m)(X - limit) against the predicted N(0, var).
struct MomentComparison {
  bool available = false;  // false when the predicted variance is 0 or undefined
  double predicted_var = 0.0;
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double mean_se = 0.0;
  double var_se = 0.0;  // sqrt((m4 - s^4) / n)
  double mean_z = 0.0;
  double var_z = 0.0;
  double var_ratio = 0.0;
  double ks_distance = 0.0;
  double ks_critical_1pct = 0.0;  // asymptotic 1% critical value 1.6276 / sqrt(n)
};

struct CltComparison {
  double fdp_limit = 0.0;
  double fpr_limit = 0.0;
  MomentComparison fdp;
  MomentComparison fpr;
};

/// Checks for the tau* = 0 regime, where V/m and any rejection vanish.
struct DegenerateChecks {
  double fraction_any_rejection = 0.0;
  double fpr_max = 0.0;
  double fpr_mean = 0.0;
};

struct ExperimentResult {
  std::vector<ReplicateOutcome> outcomes;
  ExperimentSummary summary;
  std::optional<AsymptoticSummary> asymptotics;  // conditional mode only
  std::optional<CltComparison> comparison;       // conditional mode, clt regime
  std::optional<DegenerateChecks> degenerate;    // conditional mode, tau* = 0
};

struct RunOptions {
  /// Worker threads; 0 uses std::thread::hardware_concurrency().
  std::size_t threads = 0;
  SimesOptions simes;
};

/// Runs config.replicates independent replicates (sample, then BH). Each
/// outcome depends only on (seed, replicate index) and all aggregation is
/// ordered by replicate index, so the result is bit-identical for any
/// thread count. Only scalars are kept per replicate.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& opts = {});

/// Summary statistics of a list of outcomes, reduced in list order.
ExperimentSummary summarize(std::span<const ReplicateOutcome> outcomes);

/// Compares sqrt(m)(FDP - fdp_limit) with N(0, sigma_L^2) and
/// sqrt(m)(V/m - fpr_limit) with N(0, sigma_R^2). Throws DomainError for a
/// degenerate-regime summary.
CltComparison compare_to_clt(std::span<const ReplicateOutcome> outcomes,
                             const AsymptoticSummary& summary, std::size_t m);

/// Moment and KS comparison of a sample against N(0, predicted_var).
MomentComparison compare_sample(std::span<const double> values, double predicted_var);

/// Kolmogorov-Smirnov distance between the sample ECDF and N(0, sd^2).
double ks_distance_normal(std::span<const double> values, double sd);

struct Histogram {
  std::vector<double> edges;  // bins + 1 uniform edges
  std::vector<std::size_t> counts;
};

/// Uniform-bin histogram over range (default: data min/max). Values outside
/// the range are dropped; the last bin is closed on the right. Throws
/// DomainError on empty input or bins == 0.
Histogram histogram(std::span<const double> values, std::size_t bins,
                    std::optional<std::pair<double, double>> range = std::nullopt);

}  // namespace fdpburst
