#include "hetdet/expfam.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hetdet/rootfind.hpp"

namespace hetdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2 = std::log(2.0);

void check_theta(const ExpFamilySpec& spec, double theta) {
  if (std::isnan(theta) || theta == kInf) {
    throw std::domain_error("theta outside the natural-parameter domain: " +
                            std::to_string(theta));
  }
  if (theta == -kInf && spec.kind == Family::GaussianUnit) {
    throw std::domain_error("theta = -inf is not in the Gaussian natural-parameter domain");
  }
}

}  // namespace

std::string ExpFamilySpec::name() const {
  switch (kind) {
    case Family::GaussianUnit: return "gaussian";
    case Family::PoissonUnit: return "poisson";
    case Family::BernoulliHalf: return "bernoulli-half";
  }
  return "?";
}

ExpFamilySpec ExpFamilySpec::from_name(std::string_view name) {
  if (name == "gaussian") return {Family::GaussianUnit};
  if (name == "poisson") return {Family::PoissonUnit};
  if (name == "bernoulli-half") return {Family::BernoulliHalf};
  throw std::invalid_argument("unknown family id: " + std::string(name) +
                              " (expected gaussian, poisson, bernoulli-half)");
}

double psi(const ExpFamilySpec& spec, double theta) {
  check_theta(spec, theta);
  switch (spec.kind) {
    case Family::GaussianUnit:
      return 0.5 * theta * theta;
    case Family::PoissonUnit:
      return std::expm1(theta);
    case Family::BernoulliHalf:
      // log((1 + e^theta) / 2), stable on both ends
      if (theta > 0.0) return theta + std::log1p(std::exp(-theta)) - kLog2;
      return std::log1p(std::exp(theta)) - kLog2;
  }
  return 0.0;
}

double mu_of_theta(const ExpFamilySpec& spec, double theta) {
  check_theta(spec, theta);
  switch (spec.kind) {
    case Family::GaussianUnit: return theta;
    case Family::PoissonUnit: return std::exp(theta);
    case Family::BernoulliHalf: return 1.0 / (1.0 + std::exp(-theta));
  }
  return 0.0;
}

double theta_of_mu(const ExpFamilySpec& spec, double nu) {
  if (std::isnan(nu)) throw std::invalid_argument("theta_of_mu: nu is NaN");
  switch (spec.kind) {
    case Family::GaussianUnit:
      return nu;
    case Family::PoissonUnit:
      if (nu <= 0.0) return -kInf;
      return std::log(nu);
    case Family::BernoulliHalf:
      if (nu <= 0.0) return -kInf;
      if (nu >= 1.0) return kInf;
      return std::log(nu / (1.0 - nu));
  }
  return 0.0;
}

double rate_I(const ExpFamilySpec& spec, double nu) {
  if (std::isnan(nu)) throw std::invalid_argument("rate_I: nu is NaN");
  switch (spec.kind) {
    case Family::GaussianUnit:
      return 0.5 * nu * nu;
    case Family::PoissonUnit:
      if (nu < 0.0) return kInf;
      if (nu == 0.0) return 1.0;  // limit of nu log nu - nu + 1
      return nu * std::log(nu) - nu + 1.0;
    case Family::BernoulliHalf:
      if (nu < 0.0 || nu > 1.0) return kInf;
      if (nu == 0.0 || nu == 1.0) return kLog2;
      return nu * std::log(2.0 * nu) + (1.0 - nu) * std::log(2.0 * (1.0 - nu));
  }
  return 0.0;
}

double base_mean(const ExpFamilySpec& spec) {
  switch (spec.kind) {
    case Family::GaussianUnit: return 0.0;
    case Family::PoissonUnit: return 1.0;
    case Family::BernoulliHalf: return 0.5;
  }
  return 0.0;
}

double support_lower(const ExpFamilySpec& spec) {
  return spec.kind == Family::GaussianUnit ? -kInf : 0.0;
}

double support_upper(const ExpFamilySpec& spec) {
  return spec.kind == Family::BernoulliHalf ? 1.0 : kInf;
}

double mu_at_rate_level(const ExpFamilySpec& spec, double level, bool upper) {
  if (!(level >= 0.0)) throw std::invalid_argument("mu_at_rate_level: level must be >= 0");
  const double mu0 = base_mean(spec);
  if (level == 0.0) return mu0;
  const double bound = upper ? support_upper(spec) : support_lower(spec);

  // Bounded side: if the rate never reaches the level, the endpoint is the
  // support boundary itself.
  if (std::isfinite(bound) && rate_I(spec, bound) <= level) return bound;

  auto h = [&](double nu) { return rate_I(spec, nu) - level; };
  double inner = mu0;
  double outer;
  if (std::isfinite(bound)) {
    outer = bound;
  } else {
    // expand the bracket away from mu(0) until the level is crossed
    double step = 1.0;
    outer = upper ? mu0 + step : mu0 - step;
    for (int it = 0; it < 200 && h(outer) < 0.0; ++it) {
      step *= 2.0;
      outer = upper ? mu0 + step : mu0 - step;
    }
  }
  const double lo = upper ? inner : outer;
  const double hi = upper ? outer : inner;
  return bisect(h, lo, hi, 1e-13, 1e-15);
}

TiltEndpoints tilt_endpoints(const ExpFamilySpec& spec, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("tilt_endpoints: a must be positive");
  TiltEndpoints te;
  te.a = a;
  const double level = 1.0 / a;
  te.mu_plus = mu_at_rate_level(spec, level, true);
  te.mu_minus = mu_at_rate_level(spec, level, false);
  te.theta_plus = theta_of_mu(spec, te.mu_plus);
  te.theta_minus = theta_of_mu(spec, te.mu_minus);
  return te;
}

}  // namespace hetdet
