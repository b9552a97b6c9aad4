#pragma once

namespace tsqn {

/// Standard normal CDF evaluated through erfc so both tails keep full relative accuracy.
double std_normal_cdf(double x);

/// Standard normal upper tail 1 - Phi(x).
double std_normal_sf(double x);

double std_normal_pdf(double x);

/// Phi(b) - Phi(a) for a <= b, computed on whichever side avoids cancellation.
double std_normal_band(double a, double b);

/// Quantile of the chi-squared law: smallest x with P(dof/2, x/2) = p.
/// Throws Error(Domain) for p outside (0, 1) or dof < 1.
double chi2_quantile(double p, int dof, double tol = 1e-10);

}  // namespace tsqn
