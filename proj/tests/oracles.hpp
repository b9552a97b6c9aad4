#pragma once
// Reference computations used only by the tests; deliberately independent of the library code paths.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline double phi_pdf(double z, double sd) {
  return std::exp(-0.5 * (z / sd) * (z / sd)) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

inline double phi_cdf(double z, double sd) { return 0.5 * std::erfc(-z / (sd * std::numbers::sqrt2)); }

/// Integral of h(z) f(z) over [a, b] (possibly infinite) by tanh-sinh.
inline double integrate(const std::function<double(double)>& h, double a, double b, double sd) {
  if (!(a < b)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double z) { return h(z) * phi_pdf(z, sd); };
  // Finite window: the Gaussian tail beyond 40 sd is below any double resolution.
  const double lo = std::max(a, -40.0 * sd);
  const double hi = std::min(b, 40.0 * sd);
  if (!(lo < hi)) return 0.0;
  return ts.integrate(f, lo, hi, 1e-14);
}

/// E[h(S(x + e))] for e ~ N(0, sd^2), saturation (l, u, L, U).
inline double saturated_expectation(const std::function<double(double)>& h, double x, double l, double u, double L,
                                    double U, double sd) {
  double total = integrate([&](double z) { return h(x + z); }, l - x, u - x, sd);
  if (std::isfinite(l)) total += h(L) * phi_cdf(l - x, sd);
  if (std::isfinite(u)) total += h(U) * (1.0 - phi_cdf(u - x, sd));
  return total;
}

}  // namespace oracle
