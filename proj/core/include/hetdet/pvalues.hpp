#pragma once

// Exact two-sided p-values for Y = sum of k i.i.d. base-measure draws.
// Discrete families are randomized (p_up = P(Y > y) + u * P(Y = y)) so the
// p-value is exactly Uniform(0,1) under the null; a non-randomized mode uses
// the inclusive tails instead.

#include <cstdint>
#include <span>
#include <vector>

#include "hetdet/expfam.hpp"

namespace hetdet {

struct PValueSet {
  std::vector<double> p;           // each in (0, 1]
  std::vector<std::int64_t> K;     // aligned sample sizes
  std::size_t size() const { return p.size(); }
};

enum class TailSide { Upper, Lower };

double two_sided_pvalue(const ExpFamilySpec& spec, std::int64_t k, double y, double u,
                        bool randomized = true);

PValueSet pvalues_for_dataset(const ExpFamilySpec& spec, std::span<const double> Y,
                              std::span<const std::int64_t> K, std::uint64_t seed,
                              bool randomized = true);

// Exact tail of the k-fold convolution at the mean level nu: Upper is the
// strict tail P(Y > k*nu), Lower is P(Y < k*nu).
double null_tail(const ExpFamilySpec& spec, std::int64_t k, double nu, TailSide side);
double tilted_tail(const ExpFamilySpec& spec, double theta, std::int64_t k, double nu,
                   TailSide side);

// Building blocks: the k-fold convolution law under tilt theta (theta = 0 is
// the null). conv_pmf is zero for the continuous family.
double conv_pmf(const ExpFamilySpec& spec, double theta, std::int64_t k, double y);
double conv_sf(const ExpFamilySpec& spec, double theta, std::int64_t k, double y);   // P(Y > y)
double conv_cdf(const ExpFamilySpec& spec, double theta, std::int64_t k, double y);  // P(Y <= y)

}  // namespace hetdet
