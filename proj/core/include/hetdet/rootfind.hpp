#pragma once

// Bracketed scalar solvers. All curve computations route through these; no
// derivative-based methods are used anywhere.

#include <cmath>
#include <stdexcept>
#include <string>

namespace hetdet {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bisection on [lo, hi]; requires a sign change. Stops when |f(mid)| <= ftol
// or the interval is below xtol relative to the iterate.
template <class F>
double bisect(F&& f, double lo, double hi, double ftol = 1e-12, double xtol = 1e-15) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0.0) == (fhi > 0.0)) {
    throw SolverError("bisect: root not bracketed on [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "], f = " + std::to_string(flo) + " / " +
                      std::to_string(fhi));
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) <= ftol && (hi - lo) <= 1e-9 * std::max(1.0, std::abs(mid))) return mid;
    if ((hi - lo) <= xtol * std::max(1.0, std::abs(mid))) return mid;
    if ((fm > 0.0) == (fhi > 0.0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return mid;
}

// Golden-section maximization on [lo, hi]; assumes unimodality within the
// bracket (callers establish the bracket with a coarse scan first).
template <class F>
double golden_max(F&& f, double lo, double hi, double xtol = 1e-11) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while ((b - a) > xtol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// Coarse scan to locate the best cell, then golden refinement inside it.
// Tolerates mild multimodality at scan resolution.
template <class F>
double scan_then_golden(F&& f, double lo, double hi, int npts = 129, double xtol = 1e-11) {
  if (!(hi > lo)) return lo;
  if (npts < 3) npts = 3;
  double best_x = lo;
  double best_f = f(lo);
  int best_i = 0;
  for (int i = 1; i < npts; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(npts - 1);
    const double fx = f(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
      best_i = i;
    }
  }
  const double step = (hi - lo) / double(npts - 1);
  const double wlo = (best_i == 0) ? lo : best_x - step;
  const double whi = (best_i == npts - 1) ? hi : best_x + step;
  const double refined = golden_max(f, wlo, whi, xtol);
  return (f(refined) >= best_f) ? refined : best_x;
}

}  // namespace hetdet
