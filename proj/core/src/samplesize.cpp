#include "hetdet/samplesize.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "hetdet/rng.hpp"
#include "hetdet/rootfind.hpp"

namespace hetdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_rate_function(const SampleSizeSpec& spec) {
  if (!spec.has_rate_function()) {
    throw std::invalid_argument(
        "negbin sample-size law has no rate function (simulation-only model)");
  }
}

void validate(const SampleSizeSpec& spec) {
  if (!(spec.a0 > 0.0)) throw std::invalid_argument("sample-size a0 must be positive");
  if (spec.kind == SampleSizeKind::RoundedNormal && !(spec.tau > 0.0)) {
    throw std::invalid_argument("rounded-normal tau must be positive");
  }
  if (spec.n < 2) throw std::invalid_argument("sample-size n must be >= 2");
}

}  // namespace

double SampleSizeSpec::lambda() const { return a0 * std::log(double(n)); }

std::string SampleSizeSpec::name() const {
  switch (kind) {
    case SampleSizeKind::PoissonMax1: return "poisson-max1";
    case SampleSizeKind::RoundedNormal: return "rounded-normal";
    case SampleSizeKind::NegativeBinomial: return "negbin";
    case SampleSizeKind::Deterministic: return "deterministic";
  }
  return "?";
}

SampleSizeSpec SampleSizeSpec::from_name(std::string_view name) {
  SampleSizeSpec spec;
  if (name == "poisson-max1") spec.kind = SampleSizeKind::PoissonMax1;
  else if (name == "rounded-normal") spec.kind = SampleSizeKind::RoundedNormal;
  else if (name == "negbin") spec.kind = SampleSizeKind::NegativeBinomial;
  else if (name == "deterministic") spec.kind = SampleSizeKind::Deterministic;
  else
    throw std::invalid_argument(
        "unknown sample-size id: " + std::string(name) +
        " (expected poisson-max1, rounded-normal, negbin, deterministic)");
  return spec;
}

double rate_J(const SampleSizeSpec& spec, double a) {
  require_rate_function(spec);
  if (!(a >= 0.0)) throw std::invalid_argument("rate_J: a must be >= 0");
  if (a <= spec.a0) return 0.0;
  switch (spec.kind) {
    case SampleSizeKind::PoissonMax1:
      return a * std::log(a / spec.a0) - a + spec.a0;
    case SampleSizeKind::RoundedNormal:
      return (a - spec.a0) * (a - spec.a0) / (2.0 * spec.a0 * spec.tau);
    case SampleSizeKind::Deterministic:
      return kInf;
    default:
      return 0.0;
  }
}

double rate_J_prime(const SampleSizeSpec& spec, double a) {
  require_rate_function(spec);
  if (!(a >= 0.0)) throw std::invalid_argument("rate_J_prime: a must be >= 0");
  if (a <= spec.a0) return 0.0;
  switch (spec.kind) {
    case SampleSizeKind::PoissonMax1:
      return std::log(a / spec.a0);
    case SampleSizeKind::RoundedNormal:
      return (a - spec.a0) / (spec.a0 * spec.tau);
    case SampleSizeKind::Deterministic:
      return kInf;
    default:
      return 0.0;
  }
}

double inverse_J_prime(const SampleSizeSpec& spec, double s) {
  require_rate_function(spec);
  if (!(s >= 0.0)) throw std::invalid_argument("inverse_J_prime: s must be >= 0");
  switch (spec.kind) {
    case SampleSizeKind::PoissonMax1:
      return spec.a0 * std::exp(s);
    case SampleSizeKind::RoundedNormal:
      return spec.a0 * (1.0 + spec.tau * s);
    case SampleSizeKind::Deterministic:
      return spec.a0;
    default:
      return 0.0;
  }
}

double rate_J_level(const SampleSizeSpec& spec, double level) {
  require_rate_function(spec);
  if (!(level >= 0.0)) throw std::invalid_argument("rate_J_level: level must be >= 0");
  if (level == 0.0 || spec.kind == SampleSizeKind::Deterministic) return spec.a0;
  auto h = [&](double a) { return rate_J(spec, a) - level; };
  double hi = spec.a0 + 1.0;
  for (int it = 0; it < 200 && h(hi) < 0.0; ++it) hi = spec.a0 + 2.0 * (hi - spec.a0);
  return bisect(h, spec.a0, hi, 1e-12, 1e-15);
}

std::vector<std::int64_t> sample_K(const SampleSizeSpec& spec, std::size_t count,
                                   std::uint64_t seed) {
  validate(spec);
  const double lambda = spec.lambda();
  std::vector<std::int64_t> out(count);
  std::mt19937_64 eng(rng::mix(seed, 0x4b5a6d7eULL));

  switch (spec.kind) {
    case SampleSizeKind::PoissonMax1: {
      std::poisson_distribution<std::int64_t> pois(lambda);
      for (auto& k : out) k = std::max<std::int64_t>(1, pois(eng));
      break;
    }
    case SampleSizeKind::RoundedNormal: {
      std::normal_distribution<double> norm(lambda, std::sqrt(spec.tau * lambda));
      for (auto& k : out) k = std::max<std::int64_t>(1, std::llround(norm(eng)));
      break;
    }
    case SampleSizeKind::NegativeBinomial: {
      // Gamma-Poisson mixture with success probability p = 1/lambda. The
      // default shape r = lambda/(lambda-1) matches the mean to lambda while
      // keeping variance/mean = 1/p.
      if (!(lambda > 1.0)) {
        throw std::invalid_argument("negbin law needs a0 * log n > 1");
      }
      const double p = 1.0 / lambda;
      const double r = spec.negbin_r > 0.0 ? spec.negbin_r : lambda / (lambda - 1.0);
      std::gamma_distribution<double> gamma(r, (1.0 - p) / p);
      for (auto& k : out) {
        std::poisson_distribution<std::int64_t> pois(gamma(eng));
        k = std::max<std::int64_t>(1, pois(eng));
      }
      break;
    }
    case SampleSizeKind::Deterministic: {
      const auto k = static_cast<std::int64_t>(std::ceil(lambda));
      for (auto& v : out) v = std::max<std::int64_t>(1, k);
      break;
    }
  }
  return out;
}

}  // namespace hetdet
