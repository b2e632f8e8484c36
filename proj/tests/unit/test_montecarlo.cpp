#include "fdpburst/montecarlo.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>

#include "fdpburst/error.hpp"
#include "oracles.hpp"

using namespace fdpburst;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.m = 2000;
  c.schedule = NonnullSchedule::fixed(0.1);
  c.mu_a = 2.5;
  c.q = 0.1;
  c.noise = NoiseSpec::block(10, 0.4);
  c.loadings = LoadingGroups::single({0.4, 0.3});
  c.w = {0.5, -0.2};
  c.replicates = 300;
  c.seed = 2024;
  return c;
}

ReplicateOutcome outcome(std::size_t r, std::size_t v, std::size_t m) {
  ReplicateOutcome o;
  o.r = r;
  o.v = v;
  o.fdp = static_cast<double>(v) / static_cast<double>(std::max<std::size_t>(r, 1));
  o.fpr = static_cast<double>(v) / static_cast<double>(m);
  return o;
}

void expect_same(const ExperimentResult& a, const ExperimentResult& b) {
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(a.outcomes[i].replicate, b.outcomes[i].replicate);
    EXPECT_EQ(a.outcomes[i].r, b.outcomes[i].r);
    EXPECT_EQ(a.outcomes[i].v, b.outcomes[i].v);
    EXPECT_EQ(a.outcomes[i].tau_bh, b.outcomes[i].tau_bh);
    EXPECT_EQ(a.outcomes[i].w, b.outcomes[i].w);
  }
  EXPECT_EQ(a.summary.fdr_hat, b.summary.fdr_hat);
  EXPECT_EQ(a.summary.fdp_var, b.summary.fdp_var);
  EXPECT_EQ(a.summary.fpr_var, b.summary.fpr_var);
  EXPECT_EQ(a.summary.pfdr_hat, b.summary.pfdr_hat);
}

}  // namespace

TEST(Histogram, Examples) {
  const std::vector<double> a{0, 0, 1, 1};
  const auto h = histogram(a, 2);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(h.edges, (std::vector<double>{0.0, 0.5, 1.0}));
  const std::vector<double> b{0.5};
  EXPECT_EQ(histogram(b, 1).counts, (std::vector<std::size_t>{1}));
}

TEST(Histogram, RangeDropsOutside) {
  const std::vector<double> v{-2, -1, 0, 0.5, 1, 3};
  const auto h = histogram(v, 4, std::make_pair(-1.0, 1.0));
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{1, 0, 1, 2}));
}

TEST(Histogram, Errors) {
  EXPECT_THROW(histogram({}, 3), DomainError);
  const std::vector<double> v{1.0};
  EXPECT_THROW(histogram(v, 0), DomainError);
}

TEST(Histogram, NormalChiSquareGoodnessOfFit) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(10000);
  for (auto& x : v) x = n(gen);
  const auto h = histogram(v, 50);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, v.size());
  double chi2 = 0.0;
  int used = 0;
  for (std::size_t b = 0; b < 50; ++b) {
    const double e = v.size() * (oracle::normal_cdf(h.edges[b + 1]) - oracle::normal_cdf(h.edges[b]));
    if (e < 5.0) continue;
    chi2 += (h.counts[b] - e) * (h.counts[b] - e) / e;
    ++used;
  }
  const boost::math::chi_squared dist(used - 1);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001);
}

TEST(Summarize, CountsAndPfdr) {
  const std::vector<ReplicateOutcome> o{outcome(0, 0, 10), outcome(4, 1, 10), outcome(2, 2, 10),
                                        outcome(0, 0, 10)};
  const auto s = summarize(o);
  EXPECT_EQ(s.replicates, 4u);
  EXPECT_EQ(s.n_zero_rejection, 2u);
  EXPECT_DOUBLE_EQ(s.fdr_hat, 1.25 / 4.0);
  ASSERT_TRUE(s.pfdr_hat);
  EXPECT_DOUBLE_EQ(*s.pfdr_hat, 1.25 / 2.0);
  EXPECT_GE(*s.pfdr_hat, s.fdr_hat);
  EXPECT_DOUBLE_EQ(s.fraction_any_rejection, 0.5);
  EXPECT_DOUBLE_EQ(s.fpr_max, 0.2);
  EXPECT_DOUBLE_EQ(s.fpr_mean, 0.3 / 4.0);
}

TEST(Summarize, NoRejectionsLeavesPfdrAbsent) {
  const std::vector<ReplicateOutcome> o{outcome(0, 0, 10), outcome(0, 0, 10)};
  const auto s = summarize(o);
  EXPECT_FALSE(s.pfdr_hat);
  EXPECT_EQ(s.fdr_hat, 0.0);
}

TEST(RunExperiment, ReproducibleAcrossThreadCounts) {
  const auto c = small_config();
  RunOptions one, eight;
  one.threads = 1;
  eight.threads = 8;
  const auto a = run_experiment(c, one);
  const auto b = run_experiment(c, eight);
  const auto d = run_experiment(c, eight);
  expect_same(a, b);
  expect_same(b, d);
  ASSERT_TRUE(a.comparison);
  EXPECT_EQ(a.comparison->fdp.ks_distance, b.comparison->fdp.ks_distance);
}

TEST(RunExperiment, MarginalModeReproducible) {
  auto c = small_config();
  c.latent_mode = LatentMode::marginal;
  c.w.clear();
  RunOptions one, three;
  one.threads = 1;
  three.threads = 3;
  const auto a = run_experiment(c, one);
  const auto b = run_experiment(c, three);
  expect_same(a, b);
  EXPECT_FALSE(a.asymptotics);
  EXPECT_FALSE(a.comparison);
  EXPECT_EQ(a.outcomes[0].w.size(), 2u);
  EXPECT_NE(a.outcomes[0].w, a.outcomes[1].w);
}

TEST(RunExperiment, OutcomeInvariants) {
  const auto c = small_config();
  const auto res = run_experiment(c);
  std::size_t zero = 0;
  for (const auto& o : res.outcomes) {
    EXPECT_LE(o.v, o.r);
    EXPECT_LE(o.r, c.m);
    if (o.r > 0) {
      EXPECT_LE(o.tau_bh, c.q * o.r / c.m);
    }
    zero += o.r == 0;
  }
  EXPECT_EQ(zero, res.summary.n_zero_rejection);
  EXPECT_GE(res.summary.fdr_hat, 0.0);
  EXPECT_LE(res.summary.fdr_hat, 1.0);
}

TEST(RunExperiment, AllPValuesNearOne) {
  ExperimentConfig c;
  c.m = 1000;
  c.schedule = NonnullSchedule::fixed(kPi1Floor);
  c.mu_a = 1.0;
  c.q = 0.1;
  c.loadings = LoadingGroups::single({0.9999});
  c.w = {-100.0};
  c.replicates = 200;
  const auto res = run_experiment(c);
  for (const auto& o : res.outcomes) EXPECT_EQ(o.r, 0u);
  EXPECT_EQ(res.summary.fdr_hat, 0.0);
  EXPECT_FALSE(res.summary.pfdr_hat);
  EXPECT_EQ(res.summary.n_zero_rejection, 200u);
  ASSERT_TRUE(res.degenerate);
  EXPECT_EQ(res.degenerate->fraction_any_rejection, 0.0);
  EXPECT_EQ(res.degenerate->fpr_max, 0.0);
  EXPECT_FALSE(res.comparison);
}

TEST(CompareSample, SelfConsistentNormal) {
  std::mt19937_64 gen(3);
  const double var = 2.7;
  std::normal_distribution<double> n(0.0, std::sqrt(var));
  int ok = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> v(2000);
    for (auto& x : v) x = n(gen);
    const auto c = compare_sample(v, var);
    ASSERT_TRUE(c.available);
    ok += std::fabs(c.mean_z) < 3.0 && std::fabs(c.var_z) < 3.0;
  }
  EXPECT_GE(ok, trials * 0.97);
}

TEST(CompareSample, WrongSigmaDetected) {
  std::mt19937_64 gen(5);
  const double sd = 1.3;
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> v(25000);
  for (auto& x : v) x = n(gen);
  const auto good = compare_sample(v, sd * sd);
  EXPECT_LT(std::fabs(good.var_z), 4.0);
  EXPECT_LT(good.ks_distance, good.ks_critical_1pct);
  const auto bad = compare_sample(v, 4.0 * sd * sd);
  EXPECT_GT(std::fabs(bad.var_z), 10.0);
  EXPECT_GT(bad.ks_distance, bad.ks_critical_1pct);
}

TEST(CompareSample, UnavailableWithoutVariance) {
  const std::vector<double> v{0.1, 0.2, 0.3};
  EXPECT_FALSE(compare_sample(v, 0.0).available);
  EXPECT_FALSE(compare_sample(v, std::nan("")).available);
}

TEST(CompareToClt, DegenerateThrows) {
  AsymptoticSummary s;
  s.regime = Regime::degenerate_tau_zero;
  const std::vector<ReplicateOutcome> o{outcome(1, 0, 10), outcome(0, 0, 10)};
  EXPECT_THROW(compare_to_clt(o, s, 10), DomainError);
}

TEST(KsDistance, QuantileSampleIsClose) {
  std::vector<double> v;
  const int n = 1000;
  for (int i = 0; i < n; ++i) v.push_back(2.0 * oracle::normal_upper_quantile(1.0 - (i + 0.5) / n));
  EXPECT_NEAR(ks_distance_normal(v, 2.0), 0.5 / n, 1e-9);
}

TEST(RunExperiment, NoFactorVarianceRatio) {
  ExperimentConfig c;
  c.m = 10000;
  c.schedule = NonnullSchedule::fixed(0.1);
  c.mu_a = 2.0;
  c.q = 0.1;
  c.replicates = 25000;
  c.seed = 2;
  const auto res = run_experiment(c);
  ASSERT_TRUE(res.comparison);
  const auto& f = res.comparison->fdp;
  EXPECT_GE(f.var_ratio, 0.9);
  EXPECT_LE(f.var_ratio, 1.1);
  EXPECT_LT(std::fabs(res.summary.fdr_hat - 0.09), 3.0 * res.summary.fdr_se);
}
