#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace fdpburst {

struct BhOutcome {
  std::size_t r = 0;    // rejections R_m
  std::size_t v = 0;    // false discoveries V_m
  double tau_bh = 0.0;  // P_(R_m); 0 when nothing is rejected
  double fdp = 0.0;     // v / max(r, 1)
  double fpr = 0.0;     // v / m
};

/// The step-up threshold j q / m. Both BH routes compare against exactly
/// this expression, so boundary ties are resolved identically.
inline double bh_threshold(std::size_t j, std::size_t m, double q) noexcept {
  return static_cast<double>(j) * q / static_cast<double>(m);
}

/// Benjamini-Hochberg at level q: R = max{j : P_(j) <= jq/m}, rejecting every
/// p_i <= P_(R). Comparisons are exact (inclusive, no epsilon).
///
/// Runs in O(m): each p-value is mapped to the smallest j with p <= jq/m and
/// R is read off the cumulative counts, so no sort is needed.
BhOutcome run_bh(std::span<const double> p, std::span<const std::uint8_t> h, double q);

/// Same as run_bh for a problem of size m where only the candidates with
/// p <= q are passed in; all omitted p-values must exceed q.
BhOutcome run_bh_candidates(std::span<const double> p, std::span<const std::uint8_t> h,
                            std::size_t m, double q);

/// Result of the ECDF-crossing definition of the BH threshold.
struct EcdfCrossing {
  /// sup{t in [0,1] : Ghat(t) >= t/q}.
  double sup = 0.0;
  /// Largest p-value not exceeding sup (the realized rejection threshold);
  /// 0 when no p-value does.
  double threshold = 0.0;
  /// #{i : p_i <= sup}.
  std::size_t rejections = 0;
};

/// The BH threshold computed from the empirical CDF of the p-values by a
/// sorted scan. Independent of run_bh; the two agree on the rejection set.
EcdfCrossing tau_via_ecdf(std::span<const double> p, double q);

}  // namespace fdpburst
