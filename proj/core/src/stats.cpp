#include "hetdet/stats.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace hetdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pvalues(std::span<const double> p) {
  for (double v : p) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw std::invalid_argument("p-values must lie in (0, 1], got " + std::to_string(v));
    }
  }
}

}  // namespace

Direction direction_of(StatisticId id) {
  switch (id) {
    case StatisticId::Bonferroni:
    case StatisticId::RankAdjust:
      return Direction::SmallIsSignificant;
    default:
      return Direction::LargeIsSignificant;
  }
}

std::string statistic_name(StatisticId id) {
  switch (id) {
    case StatisticId::HC: return "hc";
    case StatisticId::HCThres: return "hcthres";
    case StatisticId::Bonferroni: return "bonferroni";
    case StatisticId::RankAdjust: return "rank";
    case StatisticId::ChiSq: return "chisq";
  }
  return "?";
}

StatisticId statistic_from_name(std::string_view name) {
  if (name == "hc") return StatisticId::HC;
  if (name == "hcthres") return StatisticId::HCThres;
  if (name == "bonferroni" || name == "bonf") return StatisticId::Bonferroni;
  if (name == "rank") return StatisticId::RankAdjust;
  if (name == "chisq") return StatisticId::ChiSq;
  throw std::invalid_argument("unknown statistic id: " + std::string(name) +
                              " (expected hc, hcthres, bonferroni, rank, chisq)");
}

std::vector<StatisticId> all_statistics() {
  return {StatisticId::HC, StatisticId::HCThres, StatisticId::Bonferroni,
          StatisticId::RankAdjust, StatisticId::ChiSq};
}

RankVector ranks(std::span<const std::int64_t> K) {
  if (K.empty()) throw std::invalid_argument("ranks: empty sample-size vector");
  std::vector<std::int64_t> distinct(K.begin(), K.end());
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<std::int64_t> sorted(K.begin(), K.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  RankVector rv;
  rv.n_k.reserve(distinct.size());
  std::unordered_map<std::int64_t, std::int64_t> count_at_least;
  count_at_least.reserve(distinct.size());
  std::size_t pos = 0;
  for (std::int64_t v : distinct) {
    while (pos < sorted.size() && sorted[pos] >= v) ++pos;
    rv.n_k.emplace_back(v, static_cast<std::int64_t>(pos));
    count_at_least.emplace(v, static_cast<std::int64_t>(pos));
  }
  rv.r.resize(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) rv.r[i] = count_at_least.at(K[i]);
  return rv;
}

StatResult hc(std::span<const double> p) {
  const std::size_t n = p.size();
  if (n < 2) throw UndefinedStatistic("hc needs at least 2 p-values");
  check_pvalues(p);
  std::vector<double> s(p.begin(), p.end());
  std::sort(s.begin(), s.end());
  const double nd = double(n);
  double best = -kInf;
  std::size_t best_i = 0;
  for (std::size_t i = 1; i <= n / 2; ++i) {
    const double pi = s[i - 1];
    if (pi >= 1.0) continue;  // zero denominator
    const double v = (double(i) - nd * pi) / std::sqrt(nd * pi * (1.0 - pi));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  if (best_i == 0) throw UndefinedStatistic("hc: every candidate term has p = 1");
  StatResult r{StatisticId::HC, best, Direction::LargeIsSignificant, {}};
  r.maximizer = StatMaximizer{0, static_cast<std::int64_t>(best_i)};
  return r;
}

StatResult hc_threshold(const PValueSet& pv, std::span<const std::int64_t> thresholds) {
  if (thresholds.empty()) throw std::invalid_argument("hc_threshold: empty threshold list");
  if (pv.p.size() != pv.K.size()) throw std::invalid_argument("hc_threshold: misaligned PValueSet");
  std::vector<std::int64_t> ks(thresholds.begin(), thresholds.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  double best = -kInf;
  std::int64_t best_k = 0;
  std::int64_t best_i = 0;
  std::vector<double> subset;
  for (std::int64_t k : ks) {
    if (k < 1) throw std::invalid_argument("hc_threshold: thresholds must be >= 1");
    subset.clear();
    for (std::size_t i = 0; i < pv.K.size(); ++i) {
      if (pv.K[i] >= k) subset.push_back(pv.p[i]);
    }
    if (subset.size() < 2) continue;  // floor(n_k / 2) < 1
    try {
      const StatResult h = hc(subset);
      if (best_k == 0 || h.value > best) {
        best = h.value;
        best_k = k;
        best_i = h.maximizer ? h.maximizer->index : 0;
      }
    } catch (const UndefinedStatistic&) {
      // subset degenerate at this threshold
    }
  }
  if (best_k == 0) throw UndefinedStatistic("hc_threshold: every threshold subset degenerate");
  StatResult r{StatisticId::HCThres, best, Direction::LargeIsSignificant, {}};
  r.maximizer = StatMaximizer{best_k, best_i};
  return r;
}

StatResult bonferroni(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("bonferroni: empty p-value vector");
  check_pvalues(p);
  const auto it = std::min_element(p.begin(), p.end());
  StatResult r{StatisticId::Bonferroni, double(p.size()) * *it,
               Direction::SmallIsSignificant, {}};
  r.maximizer = StatMaximizer{0, static_cast<std::int64_t>(it - p.begin())};
  return r;
}

StatResult rank_adjust(const PValueSet& pv) {
  const std::size_t n = pv.p.size();
  if (n == 0) throw std::invalid_argument("rank_adjust: empty PValueSet");
  if (pv.K.size() != n) throw std::invalid_argument("rank_adjust: misaligned PValueSet");
  check_pvalues(pv.p);
  const RankVector rv = ranks(pv.K);
  double best = kInf;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = double(rv.r[i]) * pv.p[i];
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
#ifndef NDEBUG
  // cross-check against the subset form min_k n_k p_(1)k over distinct levels
  {
    double alt = kInf;
    for (const auto& [k, nk] : rv.n_k) {
      double pmin = kInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (pv.K[i] >= k) pmin = std::min(pmin, pv.p[i]);
      }
      alt = std::min(alt, double(nk) * pmin);
    }
    assert(alt == best);
  }
#endif
  StatResult r{StatisticId::RankAdjust, best, Direction::SmallIsSignificant, {}};
  r.maximizer = StatMaximizer{pv.K[best_i], static_cast<std::int64_t>(best_i)};
  return r;
}

StatResult chi_squared(std::span<const double> Y, std::span<const std::int64_t> K,
                       Family family) {
  if (Y.size() != K.size()) throw std::invalid_argument("chi_squared: Y and K lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < Y.size(); ++i) {
    if (K[i] < 1) throw std::invalid_argument("chi_squared: sample sizes must be >= 1");
    const double k = double(K[i]);
    switch (family) {
      case Family::GaussianUnit:
        sum += Y[i] * Y[i] / k;
        break;
      case Family::PoissonUnit:
        // Pearson form: centered at the null mean k
        sum += (Y[i] - k) * (Y[i] - k) / k;
        break;
      case Family::BernoulliHalf:
        sum += (Y[i] - 0.5 * k) * (Y[i] - 0.5 * k) / (0.25 * k);
        break;
    }
  }
  return {StatisticId::ChiSq, sum, Direction::LargeIsSignificant, {}};
}

}  // namespace hetdet
