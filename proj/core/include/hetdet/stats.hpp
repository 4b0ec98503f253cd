#pragma once

// The five test statistics: HC, threshold-HC, Bonferroni, rank-adjustment and
// chi-squared, plus sample-size ranks and subset counts.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetdet/expfam.hpp"
#include "hetdet/pvalues.hpp"

namespace hetdet {

enum class StatisticId { HC, HCThres, Bonferroni, RankAdjust, ChiSq };
enum class Direction { LargeIsSignificant, SmallIsSignificant };

Direction direction_of(StatisticId id);
std::string statistic_name(StatisticId id);
StatisticId statistic_from_name(std::string_view name);  // throws on unknown id
std::vector<StatisticId> all_statistics();

struct StatMaximizer {
  std::int64_t threshold = 0;  // sample-size threshold attaining the extremum
  std::int64_t index = 0;      // order/hypothesis index attaining it
};

struct StatResult {
  StatisticId id{};
  double value = 0.0;
  Direction direction = Direction::LargeIsSignificant;
  std::optional<StatMaximizer> maximizer;
};

struct UndefinedStatistic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// r_i = #{j: K_j >= K_i} plus the subset counts n_k at the distinct levels.
struct RankVector {
  std::vector<std::int64_t> r;
  std::vector<std::pair<std::int64_t, std::int64_t>> n_k;  // (k, n_k), k descending
};
RankVector ranks(std::span<const std::int64_t> K);

StatResult hc(std::span<const double> p);
StatResult hc_threshold(const PValueSet& pv, std::span<const std::int64_t> thresholds);
StatResult bonferroni(std::span<const double> p);
StatResult rank_adjust(const PValueSet& pv);
StatResult chi_squared(std::span<const double> Y, std::span<const std::int64_t> K,
                       Family family = Family::GaussianUnit);

}  // namespace hetdet
