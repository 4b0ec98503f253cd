#pragma once

// Exponential-family response models: log-MGF psi, mean map mu = psi', the
// Legendre-Fenchel rate function I, and the tilt endpoints where I crosses a
// given level. Three concrete families, each with hand-coded closed forms.

#include <string>
#include <string_view>

namespace hetdet {

enum class Family { GaussianUnit, PoissonUnit, BernoulliHalf };

struct ExpFamilySpec {
  Family kind = Family::GaussianUnit;

  bool discrete() const { return kind != Family::GaussianUnit; }
  // Only Bernoulli(1/2) supports the theta = -inf point-mass alternative.
  bool degenerate_alternative_supported() const { return kind == Family::BernoulliHalf; }

  std::string name() const;
  static ExpFamilySpec from_name(std::string_view name);  // throws std::invalid_argument
};

// Outermost means with I(mu) <= 1/a on each side of mu(0), and the natural
// parameters reaching them. theta is +-infinity when the support boundary is
// hit before the level crossing.
struct TiltEndpoints {
  double a = 0.0;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double theta_plus = 0.0;
  double theta_minus = 0.0;
};

double psi(const ExpFamilySpec& spec, double theta);
double mu_of_theta(const ExpFamilySpec& spec, double theta);
// Inverse mean map; +-infinity at or beyond the support boundary.
double theta_of_mu(const ExpFamilySpec& spec, double nu);
// Rate function of the base measure; +infinity outside the support hull.
double rate_I(const ExpFamilySpec& spec, double nu);

double base_mean(const ExpFamilySpec& spec);  // mu(0)
double support_lower(const ExpFamilySpec& spec);
double support_upper(const ExpFamilySpec& spec);

// Solves I(mu) = level on the chosen side of mu(0) by bracketed bisection;
// returns the support endpoint when the level is unreachable on that side.
double mu_at_rate_level(const ExpFamilySpec& spec, double level, bool upper);

TiltEndpoints tilt_endpoints(const ExpFamilySpec& spec, double a);

}  // namespace hetdet
