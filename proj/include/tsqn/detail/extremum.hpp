#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tsqn::detail {

struct Extremum {
  double value;
  double arg;
};

/// Golden-section search for the minimum of a unimodal f on [a, b].
template <class F>
Extremum golden_minimize(F&& f, double a, double b, double tol) {
  constexpr double kInvPhi = std::numbers::phi - 1.0;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? Extremum{fc, c} : Extremum{fd, d};
}

/// Minimum of f on [lo, hi]: grid of `divisions` cells, then one golden-section
/// refinement on the bracket around the best node. Endpoints are always candidates.
template <class F>
Extremum grid_minimize(F&& f, double lo, double hi, int divisions, double tol) {
  if (hi <= lo) return {f(lo), lo};
  const double step = (hi - lo) / divisions;
  Extremum best{f(lo), lo};
  int best_i = 0;
  for (int i = 1; i <= divisions; ++i) {
    const double x = i == divisions ? hi : lo + i * step;
    const double v = f(x);
    if (v < best.value) {
      best = {v, x};
      best_i = i;
    }
  }
  const double a = lo + std::max(0, best_i - 1) * step;
  const double b = std::min(hi, lo + std::min(divisions, best_i + 1) * step);
  const Extremum refined = golden_minimize(f, a, b, tol);
  return refined.value < best.value ? refined : best;
}

template <class F>
Extremum grid_maximize(F&& f, double lo, double hi, int divisions, double tol) {
  auto neg = [&f](double x) { return -f(x); };
  const Extremum e = grid_minimize(neg, lo, hi, divisions, tol);
  return {-e.value, e.arg};
}

}  // namespace tsqn::detail
