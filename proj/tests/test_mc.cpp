#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "hetdet/mc.hpp"

using namespace hetdet;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SimConfig desk_gaussian(std::int64_t n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.family = {Family::GaussianUnit};
  cfg.samplesize.kind = SampleSizeKind::PoissonMax1;
  cfg.samplesize.a0 = 0.5;
  cfg.theta = 0.8;
  cfg.beta = 0.6;
  cfg.seed = seed;
  cfg.threshold_m_list = {n / 4, n / 2};
  return cfg;
}

}  // namespace

TEST_CASE("representative thresholds") {
  const std::vector<std::int64_t> K = {7, 7, 3, 3, 1};
  CHECK(representative_thresholds(K, std::vector<std::int64_t>{2}) ==
        std::vector<std::int64_t>{7});
  CHECK(representative_thresholds(K, std::vector<std::int64_t>{5}) ==
        std::vector<std::int64_t>{1});
  CHECK(representative_thresholds(K, std::vector<std::int64_t>{1}) ==
        std::vector<std::int64_t>{7});
  // m beyond n is dropped, duplicates collapse
  CHECK(representative_thresholds(K, std::vector<std::int64_t>{1, 2, 3, 99}) ==
        std::vector<std::int64_t>{7, 3});
  CHECK_THROWS_AS(representative_thresholds(K, std::vector<std::int64_t>{0}),
                  std::invalid_argument);
}

TEST_CASE("calibration rank") {
  CHECK(Experiment::calibration_rank(0.05, 999) == 50);
  CHECK(Experiment::calibration_rank(0.05, 200) == 11);
  CHECK(Experiment::calibration_rank(0.01, 999) == 10);
  CHECK(Experiment::calibration_rank(0.1, 9) == 1);
}

TEST_CASE("config validation") {
  SimConfig cfg = desk_gaussian(100, 1);
  cfg.runs_null = 19;  // exactly ceil(1/alpha) - 1 at alpha = 0.05
  CHECK_NOTHROW(Experiment{cfg});
  cfg.runs_null = 18;
  CHECK_THROWS_AS(Experiment{cfg}, std::invalid_argument);
  cfg = desk_gaussian(100, 1);
  cfg.alpha = 0.001;  // needs 999 null runs, default is exactly enough
  CHECK_NOTHROW(Experiment{cfg});
  cfg.runs_null = 500;
  CHECK_THROWS_AS(Experiment{cfg}, std::invalid_argument);
  cfg = desk_gaussian(100, 1);
  cfg.theta = -kInf;
  CHECK_THROWS_AS(Experiment{cfg}, std::invalid_argument);
}

TEST_CASE("fixed-K protocol") {
  const SimConfig cfg = desk_gaussian(400, 11);
  const Experiment exp(cfg);
  // run seeds change the responses, never the sample sizes
  const Dataset d1 = exp.simulate_dataset(0.5, 100);
  const Dataset d2 = exp.simulate_dataset(0.5, 101);
  CHECK(d1.K == exp.K());
  CHECK(d2.K == exp.K());
  CHECK(d1.Y != d2.Y);
  // identical experiment seed reproduces the same K draw
  const Experiment again(cfg);
  CHECK(again.K() == exp.K());
  SimConfig other = cfg;
  other.seed = 12;
  CHECK(Experiment(other).K() != exp.K());
}

TEST_CASE("mixture labelling edge cases") {
  const SimConfig cfg = desk_gaussian(300, 3);
  const Experiment exp(cfg);
  const Dataset all_null = exp.simulate_dataset(0.0, 7);
  for (auto flag : all_null.is_alternative) CHECK(flag == 0);

  SimConfig bern = cfg;
  bern.family = {Family::BernoulliHalf};
  bern.theta = -kInf;
  const Experiment bexp(bern);
  const Dataset degenerate = bexp.simulate_dataset(1.0, 7);
  for (std::size_t i = 0; i < degenerate.Y.size(); ++i) {
    CHECK(degenerate.is_alternative[i] == 1);
    CHECK(degenerate.Y[i] == 0.0);
  }
}

TEST_CASE("all-null gaussian dataset has centered standardized mean") {
  const SimConfig cfg = desk_gaussian(10000, 5);
  const Experiment exp(cfg);
  const Dataset d = exp.simulate_dataset(0.0, 42);
  double mean = 0.0;
  for (std::size_t i = 0; i < d.Y.size(); ++i) {
    mean += d.Y[i] / std::sqrt(double(d.K[i]));
  }
  mean /= double(d.Y.size());
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(cfg.n)));
}

TEST_CASE("poisson and bernoulli responses follow the exact k-fold laws") {
  SimConfig cfg = desk_gaussian(20000, 17);
  cfg.family = {Family::PoissonUnit};
  cfg.theta = 0.5;
  const Experiment exp(cfg);
  const Dataset null_d = exp.simulate_dataset(0.0, 1);
  double mean_ratio = 0.0;
  for (std::size_t i = 0; i < null_d.Y.size(); ++i) {
    mean_ratio += null_d.Y[i] / double(null_d.K[i]);
  }
  mean_ratio /= double(null_d.Y.size());
  CHECK(mean_ratio == doctest::Approx(1.0).epsilon(0.02));

  const Dataset alt_d = exp.simulate_dataset(1.0, 2);
  double alt_ratio = 0.0;
  for (std::size_t i = 0; i < alt_d.Y.size(); ++i) {
    alt_ratio += alt_d.Y[i] / double(alt_d.K[i]);
  }
  alt_ratio /= double(alt_d.Y.size());
  CHECK(alt_ratio == doctest::Approx(std::exp(0.5)).epsilon(0.02));
}

TEST_CASE("calibration is deterministic and respects the order-statistic rank") {
  SimConfig cfg = desk_gaussian(300, 21);
  cfg.runs_null = 199;
  const Experiment exp(cfg);
  const CriticalValues c1 = exp.calibrate();
  const CriticalValues c2 = exp.calibrate();
  CHECK(c1 == c2);
  REQUIRE(c1.size() == 5);
  // large-is-significant cutoffs sit in the upper tail, small in the lower
  CHECK(c1.at(StatisticId::HC) > 0.0);
  CHECK(c1.at(StatisticId::Bonferroni) < 1.0);
  // threshold-HC dominates HC run-for-run, so its cutoff cannot be smaller
  CHECK(c1.at(StatisticId::HCThres) >= c1.at(StatisticId::HC));
}

TEST_CASE("parallel execution is bit-identical to sequential") {
  SimConfig cfg = desk_gaussian(500, 33);
  cfg.runs_null = 99;
  cfg.runs_alt = 60;
  cfg.threads = 1;
  const Experiment seq(cfg);
  cfg.threads = 4;
  const Experiment par(cfg);
  const CriticalValues cs = seq.calibrate();
  const CriticalValues cp = par.calibrate();
  CHECK(cs == cp);
  const auto ps = seq.power(cs);
  const auto pp = par.power(cp);
  REQUIRE(ps.size() == pp.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(ps[i].power == pp[i].power);
    CHECK(ps[i].type1_check == pp[i].type1_check);
    CHECK(ps[i].critical_value == pp[i].critical_value);
  }
}

TEST_CASE("fresh null runs cross the calibrated cutoff at about alpha") {
  SimConfig cfg = desk_gaussian(200, 8);
  cfg.runs_null = 999;
  const Experiment exp(cfg);
  const CriticalValues crit = exp.calibrate();
  const auto type1 = exp.validate_type1(crit, 1000);
  for (const auto& [id, freq] : type1) {
    CHECK(freq >= 0.03);
    CHECK(freq <= 0.07);
  }
}

TEST_CASE("overwhelming signal yields full power") {
  SimConfig cfg = desk_gaussian(300, 55);
  cfg.samplesize.kind = SampleSizeKind::Deterministic;
  cfg.samplesize.a0 = 1.0;
  cfg.theta = 3.0;
  cfg.runs_null = 99;
  cfg.runs_alt = 50;
  const Experiment exp(cfg);
  const CriticalValues crit = exp.calibrate();
  // beta = 0 forces epsilon = 1: every hypothesis carries the alternative
  const auto rows = exp.power_at(crit, 0.0, 3.0);
  for (const auto& r : rows) {
    CHECK(r.power == 1.0);
    CHECK(r.type1_check < 0.15);
  }
}

TEST_CASE("power is nondecreasing in theta at fixed beta") {
  SimConfig cfg = desk_gaussian(1000, 77);
  cfg.runs_null = 199;
  cfg.runs_alt = 300;
  cfg.beta = 0.55;
  const Experiment exp(cfg);
  const CriticalValues crit = exp.calibrate();
  std::map<StatisticId, double> prev;
  for (double theta : {0.4, 0.9, 1.6}) {
    const auto rows = exp.power_at(crit, 0.55, theta);
    for (const auto& r : rows) {
      if (prev.count(r.id)) CHECK(r.power >= prev[r.id] - 0.05);
      prev[r.id] = r.power;
    }
  }
}

TEST_CASE("equal sample sizes collapse rank-adjustment onto bonferroni") {
  SimConfig cfg = desk_gaussian(400, 91);
  cfg.samplesize.kind = SampleSizeKind::Deterministic;
  cfg.samplesize.a0 = 0.8;
  cfg.runs_null = 99;
  cfg.runs_alt = 80;
  const Experiment exp(cfg);
  const CriticalValues crit = exp.calibrate();
  CHECK(crit.at(StatisticId::RankAdjust) == crit.at(StatisticId::Bonferroni));
  const auto rows = exp.power(crit);
  double p_rank = -1.0, p_bonf = -1.0;
  for (const auto& r : rows) {
    if (r.id == StatisticId::RankAdjust) p_rank = r.power;
    if (r.id == StatisticId::Bonferroni) p_bonf = r.power;
  }
  CHECK(p_rank == p_bonf);
}

TEST_CASE("poisson responses run the full calibrate/power pipeline") {
  SimConfig cfg = desk_gaussian(500, 61);
  cfg.family = {Family::PoissonUnit};
  cfg.theta = 0.7;
  cfg.beta = 0.55;
  cfg.runs_null = 99;
  cfg.runs_alt = 60;
  const Experiment exp(cfg);
  const CriticalValues crit = exp.calibrate();
  const auto rows = exp.power(crit);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.power >= 0.0);
    CHECK(r.power <= 1.0);
    CHECK(r.type1_check <= 0.25);  // loose: 60 validation runs only
  }
  // discrete p-values stay in (0, 1] throughout
  const Dataset d = exp.simulate_dataset(cfg.epsilon(), 5);
  const auto stats = exp.statistics_on(d, 5);
  CHECK(stats.count(StatisticId::HC) == 1);
}

TEST_CASE("degenerate bernoulli alternative runs the full pipeline") {
  SimConfig cfg = desk_gaussian(400, 71);
  cfg.family = {Family::BernoulliHalf};
  cfg.theta = -kInf;
  cfg.beta = 0.55;
  cfg.runs_null = 99;
  cfg.runs_alt = 60;
  const Experiment exp(cfg);
  const CriticalValues crit = exp.calibrate();
  const auto rows = exp.power(crit);
  for (const auto& r : rows) {
    CHECK(r.power >= 0.0);
    CHECK(r.power <= 1.0);
  }
  // forcing epsilon to 1 makes every response zero. Even then the randomized
  // p-value at sample size K stays of order 2^{-K}, so plain bonferroni keeps
  // missing; the rank adjustment weights the largest-K index by rank 1 and
  // detects every run.
  const auto forced = exp.power_at(crit, 0.0, -kInf);
  double p_bonf = 0.0, p_rank = 0.0;
  for (const auto& r : forced) {
    if (r.id == StatisticId::Bonferroni) p_bonf = r.power;
    if (r.id == StatisticId::RankAdjust) p_rank = r.power;
    if (r.id == StatisticId::HC || r.id == StatisticId::HCThres) CHECK(r.power > 0.9);
  }
  CHECK(p_rank > 0.9);
  CHECK(p_rank >= p_bonf);
  CHECK(p_bonf < 0.9);  // the heterogeneity penalty the rank statistic removes
}

TEST_CASE("risk estimate endpoints") {
  SimConfig cfg = desk_gaussian(300, 101);
  cfg.runs_null = 60;
  cfg.runs_alt = 60;
  // theta = 0 makes the mixture identical to the null: no separation
  cfg.theta = 0.0;
  cfg.beta = 0.55;
  const Experiment same(cfg);
  CHECK(same.estimate_risk(StatisticId::HC) > 0.75);

  // a huge shift with epsilon = 1 separates the batches completely
  cfg.theta = 4.0;
  cfg.beta = 1e-9;  // epsilon = n^{-beta} ~ 1
  const Experiment apart(cfg);
  CHECK(apart.estimate_risk(StatisticId::ChiSq) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(apart.estimate_risk(StatisticId::HC) < 0.1);

  // the calibrated cutoff is one of the candidates: at most r - 1 of the
  // calibration batch exceed it, and the risk batches reuse the calibration
  // and power streams, so the bound is exact
  const SimConfig mcfg = desk_gaussian(300, 103);
  const Experiment mid(mcfg);
  const CriticalValues crit = mid.calibrate();
  const auto rows = mid.power(crit);
  const int r = Experiment::calibration_rank(mcfg.alpha, mcfg.runs_null);
  for (const auto& row : rows) {
    const double bound = double(r - 1) / double(mcfg.runs_null) + (1.0 - row.power);
    CHECK(mid.estimate_risk(row.id) <= bound + 1e-12);
  }
}
