#include "fdpburst/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "fdpburst/bh.hpp"
#include "fdpburst/error.hpp"
#include "fdpburst/gauss.hpp"
#include "fdpburst/sampler.hpp"

namespace fdpburst {

namespace {

constexpr std::size_t kChunk = 8;

// Statistics below this margin under sf^{-1}(q) have p > q and can never be
// rejected, so their p-values are not needed.
constexpr double kCandidateMargin = 1e-7;

struct Workspace {
  ReplicateDraw draw;
  std::vector<double> p;
  std::vector<std::uint8_t> h;
};

ReplicateOutcome run_one(const Sampler& sampler, std::uint64_t rep, double x_cut, Workspace& ws) {
  sampler.draw_statistics(rep, ws.draw);
  const std::size_t m = sampler.m();
  const double q = sampler.config().q;
  ws.p.clear();
  ws.h.clear();
  for (std::size_t i = 0; i < m; ++i) {
    if (ws.draw.x[i] >= x_cut) {
      ws.p.push_back(gauss::std_sf(ws.draw.x[i]));
      ws.h.push_back(ws.draw.h[i]);
    }
  }
  const BhOutcome bh = run_bh_candidates(ws.p, ws.h, m, q);
  ReplicateOutcome out;
  out.replicate = rep;
  out.r = bh.r;
  out.v = bh.v;
  out.fdp = bh.fdp;
  out.fpr = bh.fpr;
  out.tau_bh = bh.tau_bh;
  out.w = ws.draw.w;
  return out;
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // n - 1 denominator
  double m4 = 0.0;   // central fourth moment, n denominator
};

Moments moments(std::span<const double> v) {
  Moments mo;
  const double n = static_cast<double>(v.size());
  if (v.empty()) return mo;
  double s = 0.0;
  for (double x : v) s += x;
  mo.mean = s / n;
  double s2 = 0.0, s4 = 0.0;
  for (double x : v) {
    const double d = x - mo.mean;
    const double d2 = d * d;
    s2 += d2;
    s4 += d2 * d2;
  }
  mo.var = v.size() > 1 ? s2 / (n - 1.0) : 0.0;
  mo.m4 = s4 / n;
  return mo;
}

}  // namespace

ExperimentSummary summarize(std::span<const ReplicateOutcome> outcomes) {
  ExperimentSummary s;
  s.replicates = outcomes.size();
  if (outcomes.empty()) return s;
  std::vector<double> fdp, fpr;
  fdp.reserve(outcomes.size());
  fpr.reserve(outcomes.size());
  double pf_sum = 0.0;
  std::size_t pf_n = 0;
  for (const auto& o : outcomes) {
    fdp.push_back(o.fdp);
    fpr.push_back(o.fpr);
    if (o.r == 0) {
      ++s.n_zero_rejection;
    } else {
      pf_sum += o.fdp;
      ++pf_n;
    }
    s.fpr_max = std::max(s.fpr_max, o.fpr);
  }
  const Moments a = moments(fdp);
  const Moments b = moments(fpr);
  const double n = static_cast<double>(outcomes.size());
  s.fdp_mean = a.mean;
  s.fdp_var = a.var;
  s.fpr_mean = b.mean;
  s.fpr_var = b.var;
  s.fdr_hat = a.mean;
  s.fdr_se = std::sqrt(a.var / n);
  if (pf_n > 0) s.pfdr_hat = pf_sum / static_cast<double>(pf_n);
  s.fraction_any_rejection = static_cast<double>(pf_n) / n;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& opts) {
  ExperimentResult result;
  if (config.latent_mode == LatentMode::conditional) {
    result.asymptotics = analyze(config, config.w, opts.simes);
  }
  const Sampler sampler(config);
  const double x_cut = gauss::std_upper_quantile(config.q) - kCandidateMargin;

  const std::size_t n = config.replicates;
  result.outcomes.resize(n);
  const std::size_t threads = std::min(resolve_threads(opts.threads), std::max<std::size_t>(n, 1));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    Workspace ws;
    try {
      for (;;) {
        const std::size_t start = next.fetch_add(kChunk);
        if (start >= n) break;
        const std::size_t end = std::min(start + kChunk, n);
        for (std::size_t i = start; i < end; ++i) {
          result.outcomes[i] = run_one(sampler, i, x_cut, ws);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(n);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.summary = summarize(result.outcomes);
  if (result.asymptotics) {
    if (result.asymptotics->regime == Regime::clt) {
      result.comparison = compare_to_clt(result.outcomes, *result.asymptotics, config.m);
    } else {
      DegenerateChecks d;
      d.fraction_any_rejection = result.summary.fraction_any_rejection;
      d.fpr_max = result.summary.fpr_max;
      d.fpr_mean = result.summary.fpr_mean;
      result.degenerate = d;
    }
  }
  return result;
}

double ks_distance_normal(std::span<const double> values, double sd) {
  if (values.empty()) throw DomainError("ks_distance_normal: empty sample");
  if (!(sd > 0.0)) throw DomainError("ks_distance_normal: sd must be positive");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = gauss::std_cdf(v[i] / sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

MomentComparison compare_sample(std::span<const double> values, double predicted_var) {
  MomentComparison c;
  c.predicted_var = predicted_var;
  if (values.size() < 2) throw DomainError("compare_sample: need at least two values");
  const Moments mo = moments(values);
  const double n = static_cast<double>(values.size());
  c.empirical_mean = mo.mean;
  c.empirical_var = mo.var;
  c.mean_se = std::sqrt(mo.var / n);
  c.var_se = std::sqrt(std::max(mo.m4 - mo.var * mo.var, 0.0) / n);
  c.ks_critical_1pct = 1.6276 / std::sqrt(n);
  if (!(std::isfinite(predicted_var) && predicted_var > 0.0)) return c;
  c.available = true;
  c.mean_z = c.mean_se > 0.0 ? mo.mean / c.mean_se : 0.0;
  c.var_z = c.var_se > 0.0 ? (mo.var - predicted_var) / c.var_se
                           : std::numeric_limits<double>::infinity();
  c.var_ratio = mo.var / predicted_var;
  c.ks_distance = ks_distance_normal(values, std::sqrt(predicted_var));
  return c;
}

CltComparison compare_to_clt(std::span<const ReplicateOutcome> outcomes,
                             const AsymptoticSummary& summary, std::size_t m) {
  if (summary.regime != Regime::clt) {
    throw DomainError("compare_to_clt: no CLT in the degenerate tau* = 0 regime");
  }
  CltComparison out;
  out.fdp_limit = summary.fdp_limit;
  out.fpr_limit = summary.fpr_limit;
  const double root_m = std::sqrt(static_cast<double>(m));
  std::vector<double> zf, zr;
  zf.reserve(outcomes.size());
  zr.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    zf.push_back(root_m * (o.fdp - summary.fdp_limit));
    zr.push_back(root_m * (o.fpr - summary.fpr_limit));
  }
  out.fdp = compare_sample(zf, summary.sigma_L_sq);
  out.fpr = compare_sample(zr, summary.sigma_R_sq);
  return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins,
                    std::optional<std::pair<double, double>> range) {
  if (values.empty()) throw DomainError("histogram: empty input");
  if (bins == 0) throw DomainError("histogram: bins must be positive");
  double lo, hi;
  if (range) {
    lo = range->first;
    hi = range->second;
    if (!(lo < hi)) throw DomainError("histogram: range must satisfy lo < hi");
  } else {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double x : values) {
    if (!(x >= lo && x <= hi)) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= bins) b = bins - 1;
    // Guard against rounding placing x on the wrong side of an edge.
    while (b > 0 && x < h.edges[b]) --b;
    while (b + 1 < bins && x >= h.edges[b + 1]) ++b;
    ++h.counts[b];
  }
  return h;
}

}  // namespace fdpburst
