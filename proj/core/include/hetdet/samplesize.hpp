#pragma once

// Sample-size laws for the per-hypothesis counts K_i: rate functions J with a
// flat region [0, a0], their derivatives and inverses, and seeded samplers.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hetdet {

enum class SampleSizeKind { PoissonMax1, RoundedNormal, NegativeBinomial, Deterministic };

struct SampleSizeSpec {
  SampleSizeKind kind = SampleSizeKind::PoissonMax1;
  double a0 = 0.5;
  double tau = 1.0;         // RoundedNormal dispersion
  std::int64_t n = 100000;  // sets the typical scale lambda = a0 * log n
  // NegativeBinomial shape; 0 selects the mean-matched default
  // r = lambda / (lambda - 1), which keeps the mean at lambda and the
  // variance-to-mean ratio at a0 * log n.
  double negbin_r = 0.0;

  double lambda() const;
  bool has_rate_function() const { return kind != SampleSizeKind::NegativeBinomial; }

  std::string name() const;
  static SampleSizeSpec from_name(std::string_view name);  // kind only; throws on unknown id
};

// J(a): 0 on [0, a0], closed form above. NegativeBinomial has no rate
// function (simulation-only law) and throws std::invalid_argument.
double rate_J(const SampleSizeSpec& spec, double a);
double rate_J_prime(const SampleSizeSpec& spec, double a);
// Right inverse of J': the largest feasible a with J'(a) = s (a0 for the
// Deterministic law, whose J' jumps at a0).
double inverse_J_prime(const SampleSizeSpec& spec, double s);
// a >= a0 with J(a) = level (a0 for the Deterministic law).
double rate_J_level(const SampleSizeSpec& spec, double level);

// i.i.d. draws of K, each clamped to >= 1; identical (spec, count, seed)
// give identical vectors.
std::vector<std::int64_t> sample_K(const SampleSizeSpec& spec, std::size_t count,
                                   std::uint64_t seed);

}  // namespace hetdet
