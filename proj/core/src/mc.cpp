#include "hetdet/mc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <thread>

#include "hetdet/rng.hpp"

namespace hetdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// batch tags feeding the per-run seed derivation
constexpr std::uint64_t kTagK = 1;
constexpr std::uint64_t kTagNull = 2;
constexpr std::uint64_t kTagAlt = 3;
constexpr std::uint64_t kTagValidate = 4;
constexpr std::uint64_t kTagPValue = 5;

bool crossed(Direction dir, double value, double critical) {
  return dir == Direction::LargeIsSignificant ? value > critical : value < critical;
}

void parallel_runs(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  const int nthreads = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += nthreads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

double SimConfig::epsilon() const { return std::pow(double(n), -beta); }

std::vector<std::int64_t> representative_thresholds(std::span<const std::int64_t> K,
                                                    std::span<const std::int64_t> m_list) {
  if (K.empty()) throw std::invalid_argument("representative_thresholds: empty K");
  std::vector<std::int64_t> sorted(K.begin(), K.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<std::int64_t> out;
  for (std::int64_t m : m_list) {
    if (m < 1) throw std::invalid_argument("representative_thresholds: m must be >= 1");
    if (m > std::int64_t(sorted.size())) {
      std::cerr << "hetdet: warning: dropping threshold m = " << m
                << " (> n = " << sorted.size() << ")\n";
      continue;
    }
    // n_k >= m exactly for k up to the m-th largest sample size
    out.push_back(sorted[m - 1]);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int Experiment::calibration_rank(double alpha, int runs_null) {
  // ceil(alpha * (N + 1)); the epsilon guards against binary representation
  // slop in alpha pushing the ceiling up a rank
  return static_cast<int>(std::ceil(alpha * double(runs_null + 1) - 1e-9));
}

Experiment::Experiment(SimConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.n < 2) throw std::invalid_argument("experiment needs n >= 2");
  if (!(cfg_.alpha > 0.0 && cfg_.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (cfg_.runs_null < 1 || cfg_.runs_alt < 1) {
    throw std::invalid_argument("run counts must be >= 1");
  }
  const int min_runs = static_cast<int>(std::ceil(1.0 / cfg_.alpha - 1e-9)) - 1;
  if (cfg_.runs_null < min_runs) {
    throw std::invalid_argument("runs_null too small for alpha: the level-" +
                                std::to_string(cfg_.alpha) +
                                " order-statistic critical value needs at least " +
                                std::to_string(min_runs) + " null runs");
  }
  if (cfg_.theta == -kInf && !cfg_.family.degenerate_alternative_supported()) {
    throw std::invalid_argument("theta = -inf is only supported for bernoulli-half");
  }
  SampleSizeSpec ss = cfg_.samplesize;
  ss.n = cfg_.n;  // the sample-size law's scale follows the experiment size
  cfg_.samplesize = ss;
  K_ = sample_K(cfg_.samplesize, std::size_t(cfg_.n), rng::derive(cfg_.seed, kTagK, 0));
  thresholds_ = representative_thresholds(K_, cfg_.threshold_m_list);
  if (thresholds_.empty()) {
    std::cerr << "hetdet: warning: every threshold m exceeds n; thresholding at k = 1 only\n";
    thresholds_ = {1};
  }
  ranks_ = ranks(K_);
}

Dataset Experiment::simulate_dataset(double epsilon, std::uint64_t run_seed) const {
  return simulate_dataset_at(epsilon, cfg_.theta, run_seed);
}

Dataset Experiment::simulate_dataset_at(double epsilon, double theta,
                                        std::uint64_t run_seed) const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  const bool degenerate = theta == -kInf;
  Dataset d;
  const auto n = std::size_t(cfg_.n);
  d.Y.resize(n);
  d.K = K_;
  d.is_alternative.assign(n, 0);

  std::mt19937_64 eng(rng::mix(run_seed, 0x6d9fULL));
  std::bernoulli_distribution alt_label(epsilon);
  for (std::size_t i = 0; i < n; ++i) {
    const bool alt = epsilon > 0.0 && alt_label(eng);
    d.is_alternative[i] = alt ? 1 : 0;
    const double k = double(K_[i]);
    switch (cfg_.family.kind) {
      case Family::GaussianUnit: {
        std::normal_distribution<double> law(alt ? theta * k : 0.0, std::sqrt(k));
        d.Y[i] = law(eng);
        break;
      }
      case Family::PoissonUnit: {
        std::poisson_distribution<std::int64_t> law(alt ? std::exp(theta) * k : k);
        d.Y[i] = double(law(eng));
        break;
      }
      case Family::BernoulliHalf: {
        if (alt && degenerate) {
          d.Y[i] = 0.0;  // point mass at zero
        } else {
          const double q = alt ? mu_of_theta(cfg_.family, theta) : 0.5;
          std::binomial_distribution<std::int64_t> law(K_[i], q);
          d.Y[i] = double(law(eng));
        }
        break;
      }
    }
  }
  return d;
}

std::map<StatisticId, double> Experiment::statistics_on(const Dataset& data,
                                                        std::uint64_t run_seed) const {
  const PValueSet pv = pvalues_for_dataset(cfg_.family, data.Y, data.K,
                                           rng::mix(run_seed, kTagPValue),
                                           cfg_.randomized_pvalues);
  std::map<StatisticId, double> out;
  for (StatisticId id : cfg_.statistics) {
    switch (id) {
      case StatisticId::HC:
        out[id] = hc(pv.p).value;
        break;
      case StatisticId::HCThres:
        out[id] = hc_threshold(pv, thresholds_).value;
        break;
      case StatisticId::Bonferroni:
        out[id] = bonferroni(pv.p).value;
        break;
      case StatisticId::RankAdjust: {
        // full minimum over i of r_i * p_i on the precomputed ranks
        double best = kInf;
        for (std::size_t i = 0; i < pv.p.size(); ++i) {
          best = std::min(best, double(ranks_.r[i]) * pv.p[i]);
        }
        out[id] = best;
        break;
      }
      case StatisticId::ChiSq:
        out[id] = chi_squared(data.Y, data.K, cfg_.family.kind).value;
        break;
    }
  }
  return out;
}

std::vector<std::map<StatisticId, double>> Experiment::run_batch(double epsilon, double theta,
                                                                 int count,
                                                                 std::uint64_t tag) const {
  std::vector<std::map<StatisticId, double>> results(count);
  parallel_runs(count, cfg_.threads, [&](int run) {
    const std::uint64_t run_seed = rng::derive(cfg_.seed, tag, std::uint64_t(run));
    const Dataset d = simulate_dataset_at(epsilon, theta, run_seed);
    results[std::size_t(run)] = statistics_on(d, run_seed);
  });
  return results;
}

CriticalValues Experiment::calibrate() const {
  const int r = calibration_rank(cfg_.alpha, cfg_.runs_null);
  const auto batch = run_batch(0.0, cfg_.theta, cfg_.runs_null, kTagNull);
  CriticalValues crit;
  for (StatisticId id : cfg_.statistics) {
    std::vector<double> values;
    values.reserve(batch.size());
    for (const auto& row : batch) {
      const double v = row.at(id);
      if (std::isnan(v)) throw CalibrationError("null statistic value is NaN");
      values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    crit[id] = direction_of(id) == Direction::LargeIsSignificant
                   ? values[values.size() - std::size_t(r)]  // r-th largest
                   : values[std::size_t(r) - 1];             // r-th smallest
  }
  return crit;
}

std::vector<PowerRow> Experiment::power(const CriticalValues& critical) const {
  return power_at(critical, cfg_.beta, cfg_.theta);
}

std::vector<PowerRow> Experiment::power_at(const CriticalValues& critical, double beta,
                                           double theta) const {
  const double eps = std::pow(double(cfg_.n), -beta);
  const auto alt = run_batch(eps, theta, cfg_.runs_alt, kTagAlt);
  const auto fresh_null = run_batch(0.0, theta, cfg_.runs_alt, kTagValidate);
  std::vector<PowerRow> rows;
  rows.reserve(cfg_.statistics.size());
  for (StatisticId id : cfg_.statistics) {
    const Direction dir = direction_of(id);
    const double c = critical.at(id);
    int cross_alt = 0, cross_null = 0;
    for (const auto& row : alt) cross_alt += crossed(dir, row.at(id), c) ? 1 : 0;
    for (const auto& row : fresh_null) cross_null += crossed(dir, row.at(id), c) ? 1 : 0;
    PowerRow pr;
    pr.id = id;
    pr.beta = beta;
    pr.theta = theta;
    pr.critical_value = c;
    pr.power = double(cross_alt) / double(cfg_.runs_alt);
    pr.type1_check = double(cross_null) / double(cfg_.runs_alt);
    pr.seed_used = cfg_.seed;
    rows.push_back(pr);
  }
  return rows;
}

std::map<StatisticId, double> Experiment::validate_type1(const CriticalValues& critical,
                                                         int runs) const {
  if (runs < 1) throw std::invalid_argument("validate_type1: runs must be >= 1");
  const auto batch = run_batch(0.0, cfg_.theta, runs, kTagValidate);
  std::map<StatisticId, double> out;
  for (StatisticId id : cfg_.statistics) {
    const Direction dir = direction_of(id);
    int cross = 0;
    for (const auto& row : batch) cross += crossed(dir, row.at(id), critical.at(id)) ? 1 : 0;
    out[id] = double(cross) / double(runs);
  }
  return out;
}

double Experiment::estimate_risk(StatisticId id) const {
  const auto null_batch = run_batch(0.0, cfg_.theta, cfg_.runs_null, kTagNull);
  const auto alt_batch = run_batch(cfg_.epsilon(), cfg_.theta, cfg_.runs_alt, kTagAlt);
  std::vector<double> t0, t1;
  t0.reserve(null_batch.size());
  t1.reserve(alt_batch.size());
  for (const auto& row : null_batch) t0.push_back(row.at(id));
  for (const auto& row : alt_batch) t1.push_back(row.at(id));
  std::sort(t0.begin(), t0.end());
  std::sort(t1.begin(), t1.end());

  std::vector<double> cutoffs = t0;
  cutoffs.insert(cutoffs.end(), t1.begin(), t1.end());
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());

  const double n0 = double(t0.size());
  const double n1 = double(t1.size());
  double best = 1.0;  // cutoff at +-inf: one error term is 1, the other 0
  const bool large = direction_of(id) == Direction::LargeIsSignificant;
  for (double c : cutoffs) {
    double risk;
    if (large) {
      // P0(T >= c) + P1(T < c)
      const auto ge0 = t0.end() - std::lower_bound(t0.begin(), t0.end(), c);
      const auto lt1 = std::lower_bound(t1.begin(), t1.end(), c) - t1.begin();
      risk = double(ge0) / n0 + double(lt1) / n1;
    } else {
      // P0(T <= c) + P1(T > c)
      const auto le0 = std::upper_bound(t0.begin(), t0.end(), c) - t0.begin();
      const auto gt1 = t1.end() - std::upper_bound(t1.begin(), t1.end(), c);
      risk = double(le0) / n0 + double(gt1) / n1;
    }
    best = std::min(best, risk);
  }
  return best;
}

}  // namespace hetdet
