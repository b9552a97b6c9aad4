#pragma once

#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tsqn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Time-varying saturation S(x): L below l, identity on [l, u], U above u.
/// Thresholds may be infinite; the matching clamp value is then unused.
struct SaturationSpec {
  double l = -kInf;
  double u = kInf;
  double L = -kInf;
  double U = kInf;

  /// Validated constructor; throws Error(Data) when L <= l <= u <= U fails
  /// or a finite threshold has a non-finite clamp.
  static SaturationSpec make(double l, double u, double L, double U);

  static SaturationSpec linear() { return {}; }
  static SaturationSpec binary() { return make(0.0, 0.0, 0.0, 1.0); }
  /// Censoring with L = l and U = u.
  static SaturationSpec censored(double lower, double upper) { return make(lower, upper, lower, upper); }

  bool has_lower() const { return l != -kInf; }
  bool has_upper() const { return u != kInf; }
  bool is_linear() const { return !has_lower() && !has_upper(); }
  /// True when both clamps coincide with their thresholds (classical censoring).
  bool clamps_at_thresholds() const { return (!has_lower() || L == l) && (!has_upper() || U == u); }

  bool operator==(const SaturationSpec&) const = default;
};

/// Checks the ordering and finiteness invariants; returns an empty string when valid.
std::string describe_violation(const SaturationSpec& spec);

double saturate(double x, const SaturationSpec& spec);

struct GaussianNoise {
  double variance = 1.0;
};

/// Noise law given on a grid; CDF and pdf are linearly interpolated between nodes
/// and are 0 / 1 (CDF) and 0 (pdf) outside the grid.
struct TabulatedNoise {
  std::vector<double> grid;
  std::vector<double> cdf;
  std::vector<double> pdf;
};

class NoiseModel {
 public:
  NoiseModel() = default;

  static NoiseModel gaussian(double variance, double eta = 1.0);
  static NoiseModel tabulated(std::vector<double> grid, std::vector<double> cdf, std::vector<double> pdf,
                              double eta = 1.0);

  bool is_gaussian() const { return std::holds_alternative<GaussianNoise>(law_); }
  const GaussianNoise* as_gaussian() const { return std::get_if<GaussianNoise>(&law_); }
  const TabulatedNoise* as_tabulated() const { return std::get_if<TabulatedNoise>(&law_); }
  double eta() const { return eta_; }

  double cdf(double z) const;
  double pdf(double z) const;
  /// P(a <= e <= b) without cancellation in the Gaussian tails.
  double band(double a, double b) const;
  /// Interval outside of which the noise has (numerically) no mass.
  std::pair<double, double> support() const;
  double variance() const;
  /// Inverse CDF (left-continuous for tabulated laws); q in (0, 1).
  double quantile(double q) const;

 private:
  std::variant<GaussianNoise, TabulatedNoise> law_{GaussianNoise{}};
  double eta_ = 1.0;
};

struct LinkTolerances {
  double quadrature_abs = 1e-10;
  double bounds = 1e-8;
  int grid_divisions = 2048;
  /// Central-difference step used for G'' when estimating rho.
  double curvature_step = 1e-5;
};

/// Derivative bounds of the link on [-M, M].
struct LinkBounds {
  double g_lo = 0.0;
  double g_hi = 0.0;
  double M = 0.0;
  double rho = 0.0;
  /// g_lo is positive analytically but below the smallest normal double; it was floored there.
  bool g_lo_floored = false;
};

/// G(x) = E[S(x + e)].
double g_mean(double x, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol = {});

/// G'(x) = F(u-x) - F(l-x) + (l-L) f(l-x) + (U-u) f(u-x).
double g_deriv(double x, const SaturationSpec& spec, const NoiseModel& noise);

/// G''(x) by central difference of G'.
double g_second_deriv(double x, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol = {});

/// sigma(x) = E[(S(x + e) - G(x))^2].
double sigma_var(double x, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol = {});

/// E[(S(x + e) - G(x))^4], by adaptive quadrature plus the clamp atoms.
double central_moment4(double x, const SaturationSpec& spec, const NoiseModel& noise,
                       const LinkTolerances& tol = {});

/// inf / sup of G' on [-M, M] and sup |G''| on the same interval.
/// Throws Error(Assumption) when the infimum is not positive.
/// With `with_rho == false` the (expensive) curvature search is skipped and rho is NaN.
LinkBounds g_bounds(double M, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol = {},
                    bool with_rho = true);

}  // namespace tsqn
