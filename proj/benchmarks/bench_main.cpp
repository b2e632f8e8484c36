#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fdpburst/asymptotics.hpp"
#include "fdpburst/bh.hpp"
#include "fdpburst/gauss.hpp"
#include "fdpburst/montecarlo.hpp"
#include "fdpburst/sampler.hpp"

using namespace fdpburst;

static void BM_RhoTilde(benchmark::State& state) {
  const double rho = static_cast<double>(state.range(0)) / 100.0;
  double t = 0.003;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gauss::rho_tilde(t, 0.02, rho));
    t = t < 0.5 ? t * 1.01 : 0.003;
  }
}
BENCHMARK(BM_RhoTilde)->Arg(30)->Arg(60)->Arg(95);

static void BM_RunBh(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(m);
  std::vector<std::uint8_t> h(m);
  for (std::size_t i = 0; i < m; ++i) {
    h[i] = u(gen) < 0.1;
    p[i] = h[i] ? u(gen) * 0.01 : u(gen);
  }
  for (auto _ : state) benchmark::DoNotOptimize(run_bh(p, h, 0.1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_RunBh)->Arg(10000)->Arg(1000000);

static void BM_SamplerBlock(benchmark::State& state) {
  ExperimentConfig c;
  c.m = static_cast<std::size_t>(state.range(0));
  c.noise = NoiseSpec::block(20, 0.5);
  const Sampler s(c);
  ReplicateDraw d;
  std::uint64_t rep = 0;
  for (auto _ : state) {
    s.draw_statistics(rep++, d);
    benchmark::DoNotOptimize(d.x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplerBlock)->Arg(10000)->Arg(100000);

static void BM_SimesPoint(benchmark::State& state) {
  LoadingGroups g;
  g.k = 3;
  g.groups = {{0.25, {0.5, 0.4, 0.3}}, {0.25, {0.4, 0.5, 0.2}}, {0.25, {0.3, 0.3, 0.5}}, {0.25, {0.6, 0.2, 0.3}}};
  const std::vector<double> w{0.3, -0.5, 0.8};
  const LimitFunctions lf(g, w, 2.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(simes_point(lf, 0.1));
}
BENCHMARK(BM_SimesPoint);

static void BM_Replicate(benchmark::State& state) {
  ExperimentConfig c;
  c.m = 10000;
  c.noise = NoiseSpec::block(20, 0.5);
  c.replicates = 64;
  RunOptions o;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, o).summary.fdr_hat);
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_Replicate)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
