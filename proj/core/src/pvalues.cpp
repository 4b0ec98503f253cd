#include "hetdet/pvalues.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hetdet/rng.hpp"

namespace hetdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

double poisson_log_pmf(double lambda, std::int64_t j) {
  return -lambda + double(j) * std::log(lambda) - std::lgamma(double(j) + 1.0);
}

double poisson_pmf(double lambda, std::int64_t j) {
  if (j < 0) return 0.0;
  if (lambda == 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(poisson_log_pmf(lambda, j));
}

// P(Y <= m) summed downward from m; callers ensure m sits below the mean so
// this is the small tail.
double poisson_cdf_down(double lambda, std::int64_t m) {
  if (m < 0) return 0.0;
  KahanSum acc;
  double t = poisson_pmf(lambda, m);
  for (std::int64_t j = m; j >= 0 && t > 0.0; --j) {
    acc.add(t);
    if (t < acc.s * 1e-18) break;
    t *= double(j) / lambda;
  }
  return std::min(1.0, acc.s);
}

// P(Y > m) summed upward from m+1; small tail when m >= mean.
double poisson_sf_up(double lambda, std::int64_t m) {
  KahanSum acc;
  std::int64_t j = std::max<std::int64_t>(m + 1, 0);
  double t = poisson_pmf(lambda, j);
  for (std::int64_t it = 0; it < 100000000 && t > 0.0; ++it) {
    acc.add(t);
    ++j;
    t *= lambda / double(j);
    if (double(j) > lambda && t < acc.s * 1e-18) break;
  }
  return std::min(1.0, acc.s);
}

double poisson_sf(double lambda, double y) {  // P(Y > y)
  if (y < 0.0) return 1.0;
  if (lambda == 0.0) return 0.0;
  const auto m = static_cast<std::int64_t>(std::floor(y));
  if (double(m) < lambda) return 1.0 - poisson_cdf_down(lambda, m);
  return poisson_sf_up(lambda, m);
}

double poisson_cdf(double lambda, double y) {  // P(Y <= y)
  if (y < 0.0) return 0.0;
  if (lambda == 0.0) return 1.0;
  const auto m = static_cast<std::int64_t>(std::floor(y));
  if (double(m) < lambda) return poisson_cdf_down(lambda, m);
  return 1.0 - poisson_sf_up(lambda, m);
}

double binom_log_pmf(std::int64_t k, double q, std::int64_t j) {
  return std::lgamma(double(k) + 1.0) - std::lgamma(double(j) + 1.0) -
         std::lgamma(double(k - j) + 1.0) + double(j) * std::log(q) +
         double(k - j) * std::log1p(-q);
}

double binom_pmf(std::int64_t k, double q, std::int64_t j) {
  if (j < 0 || j > k) return 0.0;
  if (q <= 0.0) return j == 0 ? 1.0 : 0.0;
  if (q >= 1.0) return j == k ? 1.0 : 0.0;
  return std::exp(binom_log_pmf(k, q, j));
}

double binom_cdf_down(std::int64_t k, double q, std::int64_t m) {
  if (m < 0) return 0.0;
  if (m >= k) return 1.0;
  KahanSum acc;
  double t = binom_pmf(k, q, m);
  const double odds = q / (1.0 - q);
  for (std::int64_t j = m; j >= 0 && t > 0.0; --j) {
    acc.add(t);
    if (t < acc.s * 1e-18) break;
    t *= double(j) / (double(k - j + 1) * odds);
  }
  return std::min(1.0, acc.s);
}

double binom_sf_up(std::int64_t k, double q, std::int64_t m) {
  if (m >= k) return 0.0;
  KahanSum acc;
  const double odds = q / (1.0 - q);
  std::int64_t j = std::max<std::int64_t>(m + 1, 0);
  double t = binom_pmf(k, q, j);
  for (; j <= k && t > 0.0; ++j) {
    acc.add(t);
    t *= double(k - j) * odds / double(j + 1);
    if (double(j) > double(k) * q && t < acc.s * 1e-18) break;
  }
  return std::min(1.0, acc.s);
}

double binom_sf(std::int64_t k, double q, double y) {  // P(Y > y)
  if (y < 0.0) return 1.0;
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return y < double(k) ? 1.0 : 0.0;
  const auto m = static_cast<std::int64_t>(std::floor(y));
  if (m >= k) return 0.0;
  if (double(m) < double(k) * q) return 1.0 - binom_cdf_down(k, q, m);
  return binom_sf_up(k, q, m);
}

double binom_cdf(std::int64_t k, double q, double y) {  // P(Y <= y)
  if (y < 0.0) return 0.0;
  if (q <= 0.0) return 1.0;
  if (q >= 1.0) return y >= double(k) ? 1.0 : 0.0;
  const auto m = static_cast<std::int64_t>(std::floor(y));
  if (m >= k) return 1.0;
  if (double(m) < double(k) * q) return binom_cdf_down(k, q, m);
  return 1.0 - binom_sf_up(k, q, m);
}

double gauss_sf(double mean, double var, double y) {
  return 0.5 * std::erfc((y - mean) / std::sqrt(2.0 * var));
}

void check_k(std::int64_t k) {
  if (k < 1) throw std::invalid_argument("sample size k must be >= 1");
}

void check_discrete_support(const ExpFamilySpec& spec, std::int64_t k, double y) {
  if (std::floor(y) != y) {
    throw std::invalid_argument("discrete response must be an integer, got " +
                                std::to_string(y));
  }
  const bool ok = spec.kind == Family::PoissonUnit
                      ? y >= 0.0
                      : (y >= 0.0 && y <= double(k));
  if (!ok) {
    throw std::invalid_argument("response " + std::to_string(y) +
                                " outside the k-fold support (k = " + std::to_string(k) + ")");
  }
}

// Poisson mean of the tilted k-fold sum; Bernoulli success probability under
// tilt theta.
double tilted_poisson_mean(double theta, std::int64_t k) { return double(k) * std::exp(theta); }
double tilted_bernoulli_q(double theta) { return 1.0 / (1.0 + std::exp(-theta)); }

}  // namespace

double conv_pmf(const ExpFamilySpec& spec, double theta, std::int64_t k, double y) {
  check_k(k);
  switch (spec.kind) {
    case Family::GaussianUnit:
      return 0.0;
    case Family::PoissonUnit: {
      if (std::floor(y) != y || y < 0.0) return 0.0;
      return poisson_pmf(tilted_poisson_mean(theta, k), static_cast<std::int64_t>(y));
    }
    case Family::BernoulliHalf: {
      if (std::floor(y) != y) return 0.0;
      return binom_pmf(k, tilted_bernoulli_q(theta), static_cast<std::int64_t>(y));
    }
  }
  return 0.0;
}

double conv_sf(const ExpFamilySpec& spec, double theta, std::int64_t k, double y) {
  check_k(k);
  switch (spec.kind) {
    case Family::GaussianUnit:
      return gauss_sf(double(k) * theta, double(k), y);
    case Family::PoissonUnit:
      return poisson_sf(tilted_poisson_mean(theta, k), y);
    case Family::BernoulliHalf:
      return binom_sf(k, tilted_bernoulli_q(theta), y);
  }
  return 0.0;
}

double conv_cdf(const ExpFamilySpec& spec, double theta, std::int64_t k, double y) {
  check_k(k);
  switch (spec.kind) {
    case Family::GaussianUnit:
      return 0.5 * std::erfc(-(y - double(k) * theta) / std::sqrt(2.0 * double(k)));
    case Family::PoissonUnit:
      return poisson_cdf(tilted_poisson_mean(theta, k), y);
    case Family::BernoulliHalf:
      return binom_cdf(k, tilted_bernoulli_q(theta), y);
  }
  return 0.0;
}

double two_sided_pvalue(const ExpFamilySpec& spec, std::int64_t k, double y, double u,
                        bool randomized) {
  check_k(k);
  if (spec.kind == Family::GaussianUnit) {
    if (!std::isfinite(y)) throw std::invalid_argument("gaussian response must be finite");
    // 2 * (1 - Phi(|y| / sqrt(k)))
    return std::max(std::erfc(std::abs(y) / std::sqrt(2.0 * double(k))),
                    std::numeric_limits<double>::min());
  }
  check_discrete_support(spec, k, y);
  if (randomized && !(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("randomization draw u must lie in [0,1)");
  }
  const double sf = conv_sf(spec, 0.0, k, y);
  const double cdf_below = conv_cdf(spec, 0.0, k, y - 1.0);  // P(Y < y)
  const double at = conv_pmf(spec, 0.0, k, y);
  double p;
  if (randomized) {
    // p_up + p_lo = 1; both sides summed from the small end so deep tails
    // keep full precision
    const double p_up = sf + u * at;
    const double p_lo = cdf_below + (1.0 - u) * at;
    p = 2.0 * std::min(p_up, p_lo);
  } else {
    // inclusive tails on both sides
    p = 2.0 * std::min(sf + at, cdf_below + at);
  }
  return std::min(1.0, std::max(p, std::numeric_limits<double>::min()));
}

PValueSet pvalues_for_dataset(const ExpFamilySpec& spec, std::span<const double> Y,
                              std::span<const std::int64_t> K, std::uint64_t seed,
                              bool randomized) {
  if (Y.size() != K.size()) {
    throw std::invalid_argument("pvalues_for_dataset: Y and K lengths differ");
  }
  PValueSet out;
  out.p.resize(Y.size());
  out.K.assign(K.begin(), K.end());
  for (std::size_t i = 0; i < Y.size(); ++i) {
    const double u = rng::to_unit(rng::mix(seed, i));
    out.p[i] = two_sided_pvalue(spec, K[i], Y[i], u, randomized);
  }
  return out;
}

double null_tail(const ExpFamilySpec& spec, std::int64_t k, double nu, TailSide side) {
  return tilted_tail(spec, 0.0, k, nu, side);
}

double tilted_tail(const ExpFamilySpec& spec, double theta, std::int64_t k, double nu,
                   TailSide side) {
  check_k(k);
  const double x = double(k) * nu;
  if (side == TailSide::Upper) return conv_sf(spec, theta, k, x);
  // P(Y < x): for the discrete families this is the cdf just below x
  if (spec.kind == Family::GaussianUnit) return conv_cdf(spec, theta, k, x);
  return conv_cdf(spec, theta, k, std::ceil(x) - 1.0);
}

}  // namespace hetdet
