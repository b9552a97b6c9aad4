#include "tsqn/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "tsqn/error.hpp"

namespace tsqn {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Config: return "config";
    case ErrorCode::Data: return "data";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Assumption: return "assumption";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Mode: return "mode";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Domain:
    case ErrorCode::Mode:
    case ErrorCode::Schema: return 2;
    case ErrorCode::Data:
    case ErrorCode::Parse: return 3;
    case ErrorCode::Numeric: return 4;
    case ErrorCode::Assumption: return 5;
  }
  return 1;
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double std_normal_band(double a, double b) {
  if (a >= 0.0) return std_normal_sf(a) - std_normal_sf(b);
  return std_normal_cdf(b) - std_normal_cdf(a);
}

double chi2_quantile(double p, int dof, double tol) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::Domain, "chi2_quantile: probability must lie in (0,1), got " + std::to_string(p));
  }
  if (dof < 1) throw Error(ErrorCode::Domain, "chi2_quantile: dof must be >= 1");

  const double shape = 0.5 * dof;
  auto residual = [&](double x) { return boost::math::gamma_p(shape, 0.5 * x) - p; };

  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (residual(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  auto done = [tol](double a, double b) { return std::abs(b - a) <= tol * std::max(1.0, std::abs(a)); };
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, done, iters);
  if (!done(a, b)) throw NumericError("chi2_quantile: root bracket did not converge", std::abs(b - a));
  return 0.5 * (a + b);
}

}  // namespace tsqn
