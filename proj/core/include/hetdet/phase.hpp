#pragma once

// Detection-boundary curves. The homogeneous curve b(theta) is piecewise
// closed-form through the tilt endpoints; the heterogeneous curves b_J, b_H,
// b_B, b_R are constrained maximizations of
//   f(nu, a)  = a [theta nu - psi(theta)] + (1 - a I(nu) - J(a)) / 2
//   fH(nu, a) = a [theta nu - psi(theta)] + (1 - a I(nu) - 2 J(a)) / 2
// solved by closed-form interior points plus bracketed root-finding on the
// active constraint, with an independent grid oracle for verification.

#include <optional>
#include <string>
#include <vector>

#include "hetdet/expfam.hpp"
#include "hetdet/samplesize.hpp"

namespace hetdet {

enum class CurveId { B, BJ, BH, BB, BR };
enum class Regime { Interior, ConstraintActive, Degenerate };

std::string curve_name(CurveId id);
CurveId curve_from_name(std::string_view name);
std::string regime_name(Regime r);

struct PhasePoint {
  CurveId curve = CurveId::B;
  double theta = 0.0;  // -inf in the degenerate-alternative mode
  double value = 0.0;
  Regime regime = Regime::Interior;
  std::optional<std::pair<double, double>> maximizer;  // (nu*, a*)
  // residual of the defining stationarity/constraint system at the returned
  // maximizer (0 when closed-form)
  double residual = 0.0;
};

// Homogeneous boundary at fixed log-scale sample size a. Outside the
// detectable tilt range the value saturates at 1 and is tagged Degenerate.
PhasePoint b_homogeneous(const ExpFamilySpec& spec, double a, double theta);

// Gaussian boundary as a function of the sparsity index beta in (1/2, 1).
double gaussian_rho(double beta);

PhasePoint b_J_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta);
PhasePoint b_H_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta);
PhasePoint b_B_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta);
PhasePoint b_R_curve(const ExpFamilySpec& spec, const SampleSizeSpec& ss, double theta);

PhasePoint curve_point(CurveId id, const ExpFamilySpec& spec, const SampleSizeSpec& ss,
                       double theta, double homogeneous_a = 0.0);

struct GridSpec {
  int a_points = 321;
  int nu_points = 321;
  int refine_passes = 1;
  double margin = 0.25;  // relative padding on the a-range
};

// Brute-force maximization over a feasible (nu, a) grid, with per-column
// constraint roots and one local refinement pass. Independent check of every
// curve computation above.
PhasePoint grid_oracle(CurveId id, const ExpFamilySpec& spec, const SampleSizeSpec& ss,
                       double theta, const GridSpec& grid = {});

// Default evaluation grid: the range where a0 * I(mu(theta)) <= 1, with
// infinite ends clipped to +-4.
std::vector<double> default_theta_grid(const ExpFamilySpec& spec, const SampleSizeSpec& ss,
                                       int count = 200);

}  // namespace hetdet
