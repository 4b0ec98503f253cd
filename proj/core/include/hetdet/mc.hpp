#pragma once

// Monte Carlo engine: mixture simulation on a fixed sample-size draw,
// critical-value calibration from null order statistics, power estimation and
// empirical risk. Runs are seeded per (experiment seed, batch tag, run index)
// so parallel execution is bit-identical to sequential.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetdet/expfam.hpp"
#include "hetdet/pvalues.hpp"
#include "hetdet/samplesize.hpp"
#include "hetdet/stats.hpp"

namespace hetdet {

struct SimConfig {
  std::int64_t n = 10000;
  ExpFamilySpec family;
  SampleSizeSpec samplesize;
  double theta = 1.0;  // -inf selects the degenerate alternative (bernoulli-half)
  double beta = 0.65;
  int runs_null = 999;
  int runs_alt = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<std::int64_t> threshold_m_list = {3000, 10000, 30000, 100000};
  std::vector<StatisticId> statistics = all_statistics();
  bool randomized_pvalues = true;
  int threads = 1;

  double epsilon() const;  // n^{-beta}
};

struct Dataset {
  std::vector<double> Y;
  std::vector<std::int64_t> K;
  std::vector<std::uint8_t> is_alternative;
};

struct PowerRow {
  StatisticId id{};
  double beta = 0.0;
  double theta = 0.0;
  double critical_value = 0.0;
  double power = 0.0;
  double type1_check = 0.0;  // fresh-null crossing frequency at the same cutoff
  std::uint64_t seed_used = 0;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using CriticalValues = std::map<StatisticId, double>;

// For each m, the largest k with #{i: K_i >= k} >= m; entries with m > n are
// dropped with a warning, duplicates collapsed.
std::vector<std::int64_t> representative_thresholds(std::span<const std::int64_t> K,
                                                    std::span<const std::int64_t> m_list);

class Experiment {
 public:
  explicit Experiment(SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  const std::vector<std::int64_t>& K() const { return K_; }
  const std::vector<std::int64_t>& thresholds() const { return thresholds_; }

  // One mixture draw on the fixed K; epsilon = 0 gives an all-null dataset.
  Dataset simulate_dataset(double epsilon, std::uint64_t run_seed) const;
  Dataset simulate_dataset_at(double epsilon, double theta, std::uint64_t run_seed) const;

  // The configured statistics on one dataset (p-value randomization derived
  // from the run seed).
  std::map<StatisticId, double> statistics_on(const Dataset& data,
                                              std::uint64_t run_seed) const;

  // Critical values from runs_null all-null runs: the r-th largest (or
  // smallest) null value with r = calibration_rank(alpha, runs_null).
  CriticalValues calibrate() const;

  std::vector<PowerRow> power(const CriticalValues& critical) const;
  std::vector<PowerRow> power_at(const CriticalValues& critical, double beta,
                                 double theta) const;

  // Crossing frequency over fresh all-null runs at the given cutoffs.
  std::map<StatisticId, double> validate_type1(const CriticalValues& critical,
                                               int runs) const;

  // Empirical risk: best-cutoff sum of the two error frequencies over the
  // null and alternative batches.
  double estimate_risk(StatisticId id) const;

  static int calibration_rank(double alpha, int runs_null);

 private:
  std::vector<std::map<StatisticId, double>> run_batch(double epsilon, double theta,
                                                       int count, std::uint64_t tag) const;

  SimConfig cfg_;
  std::vector<std::int64_t> K_;
  std::vector<std::int64_t> thresholds_;
  RankVector ranks_;
};

}  // namespace hetdet
