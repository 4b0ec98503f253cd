#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hetdet/mc.hpp"
#include "hetdet/phase.hpp"
#include "hetdet/pvalues.hpp"
#include "hetdet/stats.hpp"

using namespace hetdet;

namespace {

std::vector<double> uniform_pvalues(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(1e-12, 1.0);
  std::vector<double> p(n);
  for (auto& v : p) v = unif(eng);
  return p;
}

void BM_HC(benchmark::State& state) {
  const auto p = uniform_pvalues(std::size_t(state.range(0)), 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hc(p).value);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HC)->Range(1 << 10, 1 << 17)->Complexity(benchmark::oNLogN);

void BM_HCThreshold(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  PValueSet pv;
  pv.p = uniform_pvalues(n, 43);
  pv.K.resize(n);
  std::mt19937_64 eng(44);
  std::poisson_distribution<std::int64_t> law{5.0};
  for (auto& k : pv.K) k = std::max<std::int64_t>(1, law(eng));
  const std::vector<std::int64_t> thresholds = {1, 3, 5, 8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hc_threshold(pv, thresholds).value);
  }
}
BENCHMARK(BM_HCThreshold)->Arg(10000)->Arg(100000);

void BM_RankAdjust(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  PValueSet pv;
  pv.p = uniform_pvalues(n, 45);
  pv.K.resize(n);
  std::mt19937_64 eng(46);
  std::poisson_distribution<std::int64_t> law{5.0};
  for (auto& k : pv.K) k = std::max<std::int64_t>(1, law(eng));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_adjust(pv).value);
  }
}
BENCHMARK(BM_RankAdjust)->Arg(10000)->Arg(100000);

void BM_TwoSidedPValuePoisson(benchmark::State& state) {
  const ExpFamilySpec pois{Family::PoissonUnit};
  const std::int64_t k = state.range(0);
  std::int64_t y = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(two_sided_pvalue(pois, k, double(y % (3 * k)), 0.5));
    ++y;
  }
}
BENCHMARK(BM_TwoSidedPValuePoisson)->Arg(3)->Arg(10)->Arg(30);

void BM_CurveBJ(benchmark::State& state) {
  const ExpFamilySpec gauss{Family::GaussianUnit};
  SampleSizeSpec ss;
  ss.kind = SampleSizeKind::PoissonMax1;
  ss.a0 = 0.5;
  double theta = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(b_J_curve(gauss, ss, theta).value);
    theta = theta < 1.9 ? theta + 0.05 : 0.1;
  }
}
BENCHMARK(BM_CurveBJ);

void BM_CurveBR(benchmark::State& state) {
  const ExpFamilySpec gauss{Family::GaussianUnit};
  SampleSizeSpec ss;
  ss.kind = SampleSizeKind::PoissonMax1;
  ss.a0 = 0.5;
  double theta = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(b_R_curve(gauss, ss, theta).value);
    theta = theta < 1.9 ? theta + 0.05 : 0.1;
  }
}
BENCHMARK(BM_CurveBR);

void BM_GridOracleBJ(benchmark::State& state) {
  const ExpFamilySpec gauss{Family::GaussianUnit};
  SampleSizeSpec ss;
  ss.kind = SampleSizeKind::PoissonMax1;
  ss.a0 = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_oracle(CurveId::BJ, gauss, ss, 0.8).value);
  }
}
BENCHMARK(BM_GridOracleBJ);

void BM_SimulationRun(benchmark::State& state) {
  SimConfig cfg;
  cfg.n = state.range(0);
  cfg.family = {Family::GaussianUnit};
  cfg.samplesize.kind = SampleSizeKind::PoissonMax1;
  cfg.samplesize.a0 = 0.5;
  cfg.theta = 1.0;
  cfg.beta = 0.6;
  cfg.seed = 7;
  cfg.threshold_m_list = {cfg.n / 4, cfg.n / 2};
  const Experiment exp(cfg);
  std::uint64_t run = 0;
  for (auto _ : state) {
    const Dataset d = exp.simulate_dataset(cfg.epsilon(), run);
    benchmark::DoNotOptimize(exp.statistics_on(d, run));
    ++run;
  }
}
BENCHMARK(BM_SimulationRun)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
