#include "fdpburst/bh.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fdpburst {

namespace {

// Smallest j in [1, m] with p <= jq/m, or m + 1 if none.
std::size_t first_step(double p, std::size_t m, double q) {
  if (!(p <= bh_threshold(m, m, q))) return m + 1;
  const double guess = std::ceil(p * static_cast<double>(m) / q);
  std::size_t j = guess < 1.0 ? 1 : static_cast<std::size_t>(std::min(guess, static_cast<double>(m)));
  while (j > 1 && p <= bh_threshold(j - 1, m, q)) --j;
  while (j <= m && p > bh_threshold(j, m, q)) ++j;
  return j;
}

}  // namespace

BhOutcome run_bh_candidates(std::span<const double> p, std::span<const std::uint8_t> h,
                            std::size_t m, double q) {
  BhOutcome out;
  if (m == 0) return out;
  // counts[j] = #{i : first_step(p_i) == j}.
  std::vector<std::size_t> counts(m + 2, 0);
  for (double pi : p) ++counts[first_step(pi, m, q)];
  // #{p_i <= jq/m} is the prefix sum; P_(j) <= jq/m iff that count is >= j.
  std::size_t cum = 0;
  std::size_t r = 0;
  for (std::size_t j = 1; j <= m; ++j) {
    cum += counts[j];
    if (cum >= j) r = j;
  }
  out.r = r;
  if (r == 0) return out;

  const double cut = bh_threshold(r, m, q);
  double tau = 0.0;
  std::size_t v = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= cut) {
      tau = std::max(tau, p[i]);
      if (h[i] == 0) ++v;
    }
  }
  out.v = v;
  out.tau_bh = tau;
  out.fdp = static_cast<double>(v) / static_cast<double>(r);
  out.fpr = static_cast<double>(v) / static_cast<double>(m);
  return out;
}

BhOutcome run_bh(std::span<const double> p, std::span<const std::uint8_t> h, double q) {
  return run_bh_candidates(p, h, p.size(), q);
}

EcdfCrossing tau_via_ecdf(std::span<const double> p, double q) {
  const std::size_t m = p.size();
  EcdfCrossing out;
  if (m == 0) return out;
  std::vector<double> sorted(p.begin(), p.end());
  std::sort(sorted.begin(), sorted.end());

  // On [sorted[j-1], sorted[j]) the ECDF equals j/m, so Ghat(t) >= t/q there
  // exactly when t <= jq/m. Walk the segments of distinct values; the
  // supremum over a feasible segment is min(jq/m, next value).
  double sup = 0.0;  // the segment [0, P_(1)) always contains t = 0
  std::size_t j = 0;
  while (j < m) {
    std::size_t next = j + 1;
    while (next < m && sorted[next] == sorted[j]) ++next;
    const double left = sorted[j];
    const double cap = bh_threshold(next, m, q);
    if (left <= cap) {
      const double right = next < m ? sorted[next] : 1.0;
      sup = std::max(sup, std::min(cap, right));
    }
    j = next;
  }
  out.sup = sup;
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), sup);
  out.rejections = static_cast<std::size_t>(it - sorted.begin());
  out.threshold = out.rejections > 0 ? *(it - 1) : 0.0;
  return out;
}

}  // namespace fdpburst
