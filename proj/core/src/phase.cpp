#include "hetdet/phase.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "hetdet/rootfind.hpp"

namespace hetdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-12;

// Shared evaluation context for one (family, sample-size law, theta) triple.
// In the degenerate-alternative mode (theta = -inf, Bernoulli) the objective
// is finite only at nu = 0, where the tilt term theta * nu reads as 0.
struct Ctx {
  const ExpFamilySpec& fam;
  const SampleSizeSpec& ss;
  double theta;
  bool degenerate;
  double psi_th;

  double tilt(double nu) const {
    if (degenerate) return nu == 0.0 ? 0.0 : -kInf;
    return theta * nu;
  }
  double f(double nu, double a) const {
    return a * (tilt(nu) - psi_th) +
           0.5 * (1.0 - a * rate_I(fam, nu) - rate_J(ss, a));
  }
  double fH(double nu, double a) const {
    return a * (tilt(nu) - psi_th) +
           0.5 * (1.0 - a * rate_I(fam, nu) - 2.0 * rate_J(ss, a));
  }
  double obj(bool hc_variant, double nu, double a) const {
    return hc_variant ? fH(nu, a) : f(nu, a);
  }
};

Ctx make_ctx(const ExpFamilySpec& fam, const SampleSizeSpec& ss, double theta) {
  if (std::isnan(theta)) throw std::invalid_argument("curve theta is NaN");
  if (!ss.has_rate_function()) {
    throw std::invalid_argument(
        "boundary curves need a sample-size rate function; negbin is simulation-only");
  }
  const bool degenerate = theta == -kInf;
  if (degenerate && !fam.degenerate_alternative_supported()) {
    throw std::domain_error("theta = -inf is only supported for bernoulli-half");
  }
  if (theta == kInf) throw std::domain_error("theta = +inf is not a valid alternative");
  return Ctx{fam, ss, theta, degenerate, psi(fam, theta)};
}

bool trivially_detectable(const Ctx& c) {
  const double nu_theta = mu_of_theta(c.fam, c.theta);
  return c.ss.a0 * rate_I(c.fam, nu_theta) > 1.0 + kFeasTol;
}

PhasePoint degenerate_region_point(CurveId id, double theta) {
  // a simple most-extreme-value test already detects every beta < 1 here
  PhasePoint pt;
  pt.curve = id;
  pt.theta = theta;
  pt.value = 1.0;
  pt.regime = Regime::Degenerate;
  return pt;
}

// Active-constraint system for b_J / b_H, parameterized by the tilt ratio
// rho = theta*/theta in [1, 2]. The slope fed to the J'-inverse and the
// constraint whose root is sought differ between the two curves.
struct ActiveSolution {
  double rho = 0.0;
  double a = 0.0;
  double nu = 0.0;
  double residual = 0.0;
};

ActiveSolution solve_active(const Ctx& c, bool hc_variant) {
  auto slope = [&](double rho) {
    const double t = rho * c.theta;
    return hc_variant ? psi(c.fam, t) / rho - c.psi_th
                      : psi(c.fam, t) - rho * c.psi_th;
  };
  auto a_of = [&](double rho) {
    return inverse_J_prime(c.ss, std::max(0.0, slope(rho)));
  };
  auto G = [&](double rho) {
    const double a = a_of(rho);
    const double I = rate_I(c.fam, mu_of_theta(c.fam, rho * c.theta));
    return hc_variant ? a * I - 1.0 : a * I + rate_J(c.ss, a) - 1.0;
  };

  // scan [1, 2] for sign changes; the root is expected to be unique, but if
  // the scan disagrees we evaluate every root and keep the best objective
  constexpr int kCells = 64;
  std::vector<double> roots;
  double prev_rho = 1.0;
  double prev_g = G(prev_rho);
  if (prev_g == 0.0) roots.push_back(prev_rho);
  for (int i = 1; i <= kCells; ++i) {
    const double rho = 1.0 + double(i) / double(kCells);
    const double g = G(rho);
    if (g == 0.0) {
      roots.push_back(rho);
    } else if ((prev_g < 0.0) != (g < 0.0)) {
      roots.push_back(bisect(G, prev_rho, rho, 1e-12, 1e-15));
    }
    prev_rho = rho;
    prev_g = g;
  }
  if (roots.empty()) {
    throw SolverError("active-constraint system has no root in the tilt-ratio bracket [1,2]; "
                      "G(1) = " + std::to_string(G(1.0)) + ", G(2) = " + std::to_string(G(2.0)));
  }
  if (roots.size() > 1) {
    std::cerr << "hetdet: warning: " << roots.size()
              << " candidate roots in the active-constraint bracket; keeping the best\n";
  }
  ActiveSolution best;
  double best_val = -kInf;
  for (double rho : roots) {
    const double a = a_of(rho);
    const double nu = mu_of_theta(c.fam, rho * c.theta);
    const double val = c.obj(hc_variant, nu, a);
    if (val > best_val) {
      best_val = val;
      best = {rho, a, nu, std::abs(G(rho))};
    }
  }
  return best;
}

PhasePoint interior_or_active(const Ctx& c, CurveId id, bool hc_variant) {
  PhasePoint pt;
  pt.curve = id;
  pt.theta = c.theta;
  if (trivially_detectable(c)) return degenerate_region_point(id, c.theta);

  const double two_theta = c.degenerate ? -kInf : 2.0 * c.theta;
  const double s = hc_variant ? 0.5 * psi(c.fam, two_theta) - c.psi_th
                              : psi(c.fam, two_theta) - 2.0 * c.psi_th;
  const double a_int = inverse_J_prime(c.ss, std::max(0.0, s));
  const double nu_int = mu_of_theta(c.fam, two_theta);
  const double I_int = rate_I(c.fam, nu_int);
  const double room = hc_variant ? a_int * I_int
                                 : a_int * I_int + rate_J(c.ss, a_int);
  if (room <= 1.0 + kFeasTol) {
    pt.value = c.obj(hc_variant, nu_int, a_int);
    pt.regime = Regime::Interior;
    pt.maximizer = {{nu_int, a_int}};
    pt.residual = 0.0;
    return pt;
  }

  pt.regime = Regime::ConstraintActive;
  if (c.degenerate) {
    // nu is pinned at 0, so the constraint alone determines a
    const double I0 = rate_I(c.fam, 0.0);
    double a_star;
    if (hc_variant) {
      a_star = 1.0 / I0;
    } else {
      const double a1 = rate_J_level(c.ss, 1.0);
      a_star = bisect([&](double a) { return a * I0 + rate_J(c.ss, a) - 1.0; },
                      c.ss.a0, a1, 1e-12, 1e-15);
    }
    pt.value = c.obj(hc_variant, 0.0, a_star);
    pt.maximizer = {{0.0, a_star}};
    pt.residual = hc_variant ? 0.0
                             : std::abs(a_star * I0 + rate_J(c.ss, a_star) - 1.0);
    return pt;
  }

  const ActiveSolution sol = solve_active(c, hc_variant);
  pt.value = c.obj(hc_variant, sol.nu, sol.a);
  pt.maximizer = {{sol.nu, sol.a}};
  pt.residual = sol.residual;
  return pt;
}

// 1-D maximization over a along an equality manifold, used by b_B and b_R.
struct ManifoldMax {
  double a = 0.0;
  double nu = 0.0;
  double value = -kInf;
  bool at_domain_edge = false;
};

ManifoldMax maximize_on_manifold(const Ctx& c, bool hc_variant) {
  const bool upper = c.theta > 0.0;
  const double bound = upper ? support_upper(c.fam) : support_lower(c.fam);
  const double I_bound = std::isfinite(bound) ? rate_I(c.fam, bound) : kInf;
  const double a1 = rate_J_level(c.ss, 1.0);

  auto level = [&](double a) {
    return hc_variant ? 1.0 / a : (1.0 - rate_J(c.ss, a)) / a;
  };
  auto nu_at = [&](double a) { return mu_at_rate_level(c.fam, level(a), upper); };
  auto h = [&](double a) { return c.obj(hc_variant, nu_at(a), a); };
  // along-manifold derivative sign: dh/da = (theta/theta*) [slope(a) - J'(a)]
  auto stationarity_gap = [&](double a) {
    const double th_star = theta_of_mu(c.fam, nu_at(a));
    if (!std::isfinite(th_star) || th_star == 0.0) return std::nan("");
    const double rho = th_star / c.theta;
    const double slope = hc_variant ? psi(c.fam, th_star) / rho - c.psi_th
                                    : psi(c.fam, th_star) - rho * c.psi_th;
    return slope - rate_J_prime(c.ss, a);
  };

  double a_lo = std::max(1e-6, c.ss.a0 / 64.0);
  double a_hi = hc_variant ? a1 + std::max(1.0, a1 - c.ss.a0) : a1;
  if (std::isfinite(I_bound)) {
    // the manifold only reaches the chosen side once the level drops to
    // I(bound): 1/a <= I_bound, resp. (1 - J(a))/a <= I_bound
    if (hc_variant) {
      a_lo = std::max(a_lo, 1.0 / I_bound);
      // the manifold keeps running past a1; make sure the domain holds it
      a_hi = std::max(a_hi, 1.5 * a_lo + 0.5);
    } else {
      auto gap = [&](double a) { return level(a) - I_bound; };
      if (gap(a_lo) > 0.0) {
        // a I(bound) + J(a) crosses 1 before a1, so the crossing exists
        a_lo = bisect(gap, a_lo, a1, 1e-12, 1e-15);
      }
    }
  }
  if (!(a_hi > a_lo)) {
    // single-point manifold
    return {a_lo, nu_at(a_lo), h(a_lo), true};
  }

  double a_star = a_lo;
  for (int tries = 0; tries < 6; ++tries) {
    a_star = scan_then_golden(h, a_lo, a_hi, 257, 1e-11);
    const double span = a_hi - a_lo;
    if (hc_variant && a_star > a_hi - 0.02 * span) {
      a_hi += span;  // optimum pressed the upper edge, widen
      continue;
    }
    break;
  }
  // Golden section localizes a flat maximum only to ~sqrt(eps); polish the
  // maximizer by bisecting the stationarity equation around it.
  {
    const double w = std::max(1e-4 * std::abs(a_star), 1e-6);
    double plo = std::max(a_lo, a_star - w);
    double phi = std::min(a_hi, a_star + w);
    for (int widen = 0; widen < 10; ++widen) {
      const double glo = stationarity_gap(plo);
      const double ghi = stationarity_gap(phi);
      if (std::isnan(glo) || std::isnan(ghi)) break;
      if ((glo > 0.0) != (ghi > 0.0)) {
        a_star = bisect(stationarity_gap, plo, phi, 1e-13, 1e-15);
        break;
      }
      if (plo == a_lo && phi == a_hi) break;  // nothing left to widen
      const double width = phi - plo;
      plo = std::max(a_lo, a_star - 2.0 * width);
      phi = std::min(a_hi, a_star + 2.0 * width);
    }
  }
  ManifoldMax m;
  m.a = a_star;
  m.nu = nu_at(a_star);
  m.value = h(a_star);
  const double span = a_hi - a_lo;
  m.at_domain_edge = (a_star < a_lo + 0.005 * span) || (a_star > a_hi - 0.005 * span);
  return m;
}

PhasePoint equality_curve(const Ctx& c, CurveId id, bool hc_variant) {
  PhasePoint pt;
  pt.curve = id;
  pt.theta = c.theta;
  if (trivially_detectable(c)) return degenerate_region_point(id, c.theta);
  pt.regime = Regime::ConstraintActive;

  if (c.degenerate) {
    const double I0 = rate_I(c.fam, 0.0);
    double a_star;
    if (hc_variant) {
      a_star = 1.0 / I0;
    } else {
      const double a1 = rate_J_level(c.ss, 1.0);
      a_star = bisect([&](double a) { return a * I0 + rate_J(c.ss, a) - 1.0; },
                      1e-9, a1, 1e-12, 1e-15);
    }
    pt.value = c.obj(hc_variant, 0.0, a_star);
    pt.maximizer = {{0.0, a_star}};
    return pt;
  }

  const ManifoldMax m = maximize_on_manifold(c, hc_variant);
  pt.value = m.value;
  pt.maximizer = {{m.nu, m.a}};

  // residuals of the defining system at the maximizer
  const double constraint = hc_variant
                                ? m.a * rate_I(c.fam, m.nu) - 1.0
                                : m.a * rate_I(c.fam, m.nu) + rate_J(c.ss, m.a) - 1.0;
  double stationarity = 0.0;
  const double theta_star = theta_of_mu(c.fam, m.nu);
  if (!m.at_domain_edge && std::isfinite(theta_star) && theta_star != 0.0) {
    const double rho = theta_star / c.theta;
    const double slope = hc_variant ? psi(c.fam, theta_star) / rho - c.psi_th
                                    : psi(c.fam, theta_star) - rho * c.psi_th;
    stationarity = std::abs(rate_J_prime(c.ss, m.a) - slope);
  }
  pt.residual = std::max(std::abs(constraint), stationarity);
  return pt;
}

}  // namespace

std::string curve_name(CurveId id) {
  switch (id) {
    case CurveId::B: return "b";
    case CurveId::BJ: return "bj";
    case CurveId::BH: return "bh";
    case CurveId::BB: return "bb";
    case CurveId::BR: return "br";
  }
  return "?";
}

CurveId curve_from_name(std::string_view name) {
  if (name == "b") return CurveId::B;
  if (name == "bj") return CurveId::BJ;
  if (name == "bh") return CurveId::BH;
  if (name == "bb") return CurveId::BB;
  if (name == "br") return CurveId::BR;
  throw std::invalid_argument("unknown curve id: " + std::string(name) +
                              " (expected b, bj, bh, bb, br)");
}

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::Interior: return "interior";
    case Regime::ConstraintActive: return "constraint-active";
    case Regime::Degenerate: return "degenerate";
  }
  return "?";
}

double gaussian_rho(double beta) {
  if (!(beta > 0.5 && beta < 1.0)) {
    throw std::invalid_argument("gaussian_rho: beta must lie in (1/2, 1)");
  }
  if (beta <= 0.75) return beta - 0.5;
  const double t = 1.0 - std::sqrt(1.0 - beta);
  return t * t;
}

PhasePoint b_homogeneous(const ExpFamilySpec& spec, double a, double theta) {
  if (!(a > 0.0)) throw std::invalid_argument("b_homogeneous: a must be positive");
  if (std::isnan(theta)) throw std::invalid_argument("b_homogeneous: theta is NaN");
  if (theta == -kInf && !spec.degenerate_alternative_supported()) {
    throw std::domain_error("theta = -inf is only supported for bernoulli-half");
  }

  const TiltEndpoints te = tilt_endpoints(spec, a);
  PhasePoint pt;
  pt.curve = CurveId::B;
  pt.theta = theta;

  if (theta >= 0.5 * te.theta_minus && theta <= 0.5 * te.theta_plus) {
    const double two_theta = theta == -kInf ? -kInf : 2.0 * theta;
    pt.value = 0.5 * (1.0 + a * (psi(spec, two_theta) - 2.0 * psi(spec, theta)));
    pt.regime = Regime::Interior;
    pt.maximizer = {{mu_of_theta(spec, two_theta), a}};
    return pt;
  }
  if (theta > 0.0 && theta <= te.theta_plus) {
    pt.value = a * (theta * te.mu_plus - psi(spec, theta));
    pt.regime = Regime::ConstraintActive;
    pt.maximizer = {{te.mu_plus, a}};
    pt.residual = std::abs(rate_I(spec, te.mu_plus) - 1.0 / a);
    return pt;
  }
  if (theta < 0.0 && theta >= te.theta_minus) {
    pt.value = a * (theta * te.mu_minus - psi(spec, theta));
    pt.regime = Regime::ConstraintActive;
    pt.maximizer = {{te.mu_minus, a}};
    pt.residual = std::abs(rate_I(spec, te.mu_minus) - 1.0 / a);
    return pt;
  }
  return degenerate_region_point(CurveId::B, theta);
}

PhasePoint b_J_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta) {
  return interior_or_active(make_ctx(spec, ss, theta), CurveId::BJ, false);
}

PhasePoint b_H_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta) {
  return interior_or_active(make_ctx(spec, ss, theta), CurveId::BH, true);
}

PhasePoint b_B_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta) {
  return equality_curve(make_ctx(spec, ss, theta), CurveId::BB, true);
}

PhasePoint b_R_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta) {
  return equality_curve(make_ctx(spec, ss, theta), CurveId::BR, false);
}

PhasePoint curve_point(CurveId id, const ExpFamilySpec& spec, const SampleSizeSpec& ss,
                       double theta, double homogeneous_a) {
  switch (id) {
    case CurveId::B:
      return b_homogeneous(spec, homogeneous_a > 0.0 ? homogeneous_a : ss.a0, theta);
    case CurveId::BJ: return b_J_curve(spec, ss, theta);
    case CurveId::BH: return b_H_curve(spec, ss, theta);
    case CurveId::BB: return b_B_curve(spec, ss, theta);
    case CurveId::BR: return b_R_curve(spec, ss, theta);
  }
  throw std::invalid_argument("curve_point: bad curve id");
}

PhasePoint grid_oracle(CurveId id, const ExpFamilySpec& spec, const SampleSizeSpec& ss,
                       double theta, const GridSpec& grid) {
  if (id == CurveId::B) {
    throw std::invalid_argument(
        "grid_oracle: use BJ with a deterministic sample-size law for the homogeneous curve");
  }
  const Ctx c = make_ctx(spec, ss, theta);
  if (trivially_detectable(c)) return degenerate_region_point(id, theta);

  const bool eq = id == CurveId::BB || id == CurveId::BR;
  const bool hcv = id == CurveId::BH || id == CurveId::BB;
  auto level = [&](double a) {
    return hcv ? 1.0 / a : (1.0 - rate_J(c.ss, a)) / a;
  };

  const double a1 = rate_J_level(ss, 1.0);
  double best_val = -kInf;
  double best_a = 0.0, best_nu = 0.0;
  bool best_on_boundary = false;
  double tol_reported = 0.0;

  if (c.degenerate) {
    const double I0 = rate_I(spec, 0.0);
    double lo = 1e-6;
    double hi = a1 + grid.margin * std::max(1.0, a1 - ss.a0);
    for (int pass = 0; pass <= grid.refine_passes; ++pass) {
      const double step = (hi - lo) / double(grid.a_points - 1);
      for (int i = 0; i < grid.a_points; ++i) {
        const double a = lo + step * double(i);
        const double lvl = level(a);
        if (eq) continue;  // handled by the root below
        if (lvl < I0 - kFeasTol) continue;
        const double v = c.obj(hcv, 0.0, a);
        if (v > best_val) { best_val = v; best_a = a; best_nu = 0.0; best_on_boundary = false; }
      }
      // boundary root: level(a) = I0
      auto gap = [&](double a) { return level(a) - I0; };
      if (gap(lo) > 0.0 && gap(hi) < 0.0) {
        const double ab = bisect(gap, lo, hi, 1e-12, 1e-15);
        const double v = c.obj(hcv, 0.0, ab);
        if (v > best_val) { best_val = v; best_a = ab; best_nu = 0.0; best_on_boundary = true; }
      }
      tol_reported = step;
      const double w = 2.0 * step;
      lo = std::max(1e-9, best_a - w);
      hi = best_a + w;
    }
  } else {
    const bool upper = c.theta > 0.0;
    const double bound = upper ? support_upper(spec) : support_lower(spec);
    const double I_bound = std::isfinite(bound) ? rate_I(spec, bound) : kInf;
    const double mu0 = base_mean(spec);

    double a_lo = std::max(1e-6, ss.a0 / 2.0);
    double a_hi = a1 + grid.margin * std::max(1.0, a1 - ss.a0);
    if (hcv) {
      a_hi += std::max(1.0, a1 - ss.a0);  // b_B's manifold extends past a1
      if (std::isfinite(I_bound)) a_hi = std::max(a_hi, 1.5 / I_bound + 0.5);
    }

    // nu range: cover the unconstrained maximizer and the farthest reachable
    // constraint root
    const double far_level = std::min(level(a_lo), I_bound);
    double nu_far = mu_at_rate_level(spec, std::max(0.0, far_level), upper);
    const double nu_unc = mu_of_theta(spec, 2.0 * c.theta);
    double nu_lo, nu_hi;
    if (upper) {
      nu_hi = std::max(nu_far, nu_unc);
      nu_hi += 0.05 * std::max(1.0, std::abs(nu_hi - mu0));
      if (std::isfinite(bound)) nu_hi = std::min(nu_hi, bound);
      nu_lo = mu0;
    } else {
      nu_lo = std::min(nu_far, nu_unc);
      nu_lo -= 0.05 * std::max(1.0, std::abs(nu_lo - mu0));
      if (std::isfinite(bound)) nu_lo = std::max(nu_lo, bound);
      nu_hi = mu0;
    }

    for (int pass = 0; pass <= grid.refine_passes; ++pass) {
      const double astep = (a_hi - a_lo) / double(grid.a_points - 1);
      const double nstep = (nu_hi - nu_lo) / double(grid.nu_points - 1);
      for (int i = 0; i < grid.a_points; ++i) {
        const double a = a_lo + astep * double(i);
        const double lvl = level(a);
        if (lvl < -kFeasTol) continue;  // J(a) > 1
        const double lvl_clamped = std::max(0.0, lvl);
        const bool reachable = lvl_clamped <= I_bound + kFeasTol;
        if (!eq) {
          for (int j = 0; j < grid.nu_points; ++j) {
            const double nu = nu_lo + nstep * double(j);
            if (rate_I(spec, nu) > lvl_clamped + kFeasTol) continue;
            const double v = c.obj(hcv, nu, a);
            if (v > best_val) {
              best_val = v; best_a = a; best_nu = nu; best_on_boundary = false;
            }
          }
        }
        if (reachable) {
          const double nub = mu_at_rate_level(spec, lvl_clamped, upper);
          // only a true equality point qualifies for the equality curves
          if (!eq || std::abs(rate_I(spec, nub) - lvl_clamped) <= 1e-9 * std::max(1.0, lvl_clamped)) {
            const double v = c.obj(hcv, nub, a);
            if (v > best_val) {
              best_val = v; best_a = a; best_nu = nub; best_on_boundary = true;
            }
          }
        }
      }
      tol_reported = astep;
      const double wa = 2.0 * astep;
      const double wn = 2.0 * nstep;
      a_lo = std::max(1e-9, best_a - wa);
      a_hi = best_a + wa;
      if (!eq) {
        nu_lo = best_nu - wn;
        nu_hi = best_nu + wn;
        if (std::isfinite(bound)) {
          if (upper) nu_hi = std::min(nu_hi, bound);
          else nu_lo = std::max(nu_lo, bound);
        }
        if (upper) nu_lo = std::max(nu_lo, mu0 - wn);
        else nu_hi = std::min(nu_hi, mu0 + wn);
      }
    }
  }

  if (best_val == -kInf) throw SolverError("grid_oracle: empty feasible set");
  PhasePoint pt;
  pt.curve = id;
  pt.theta = theta;
  pt.value = best_val;
  pt.regime = (eq || best_on_boundary) ? Regime::ConstraintActive : Regime::Interior;
  pt.maximizer = {{best_nu, best_a}};
  pt.residual = tol_reported;
  return pt;
}

std::vector<double> default_theta_grid(const ExpFamilySpec& spec, const SampleSizeSpec& ss,
                                       int count) {
  if (count < 2) throw std::invalid_argument("default_theta_grid: count must be >= 2");
  const TiltEndpoints te = tilt_endpoints(spec, ss.a0);
  const double lo = std::max(te.theta_minus, -4.0);
  const double hi = std::min(te.theta_plus, 4.0);
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * double(i) / double(count - 1);
  }
  return grid;
}

}  // namespace hetdet
