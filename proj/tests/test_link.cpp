#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tsqn/error.hpp"
#include "tsqn/link.hpp"
#include "tsqn/special.hpp"

using namespace tsqn;

namespace {

const NoiseModel kStd = NoiseModel::gaussian(1.0);

double oracle_mean(double x, const SaturationSpec& s, double sd) {
  return oracle::saturated_expectation([](double v) { return v; }, x, s.l, s.u, s.L, s.U, sd);
}

double oracle_var(double x, const SaturationSpec& s, double sd) {
  const double m = oracle_mean(x, s, sd);
  return oracle::saturated_expectation([m](double v) { return (v - m) * (v - m); }, x, s.l, s.u, s.L, s.U, sd);
}

}  // namespace

TEST(Saturation, ClampsOutsideBand) {
  const auto s = SaturationSpec::make(0.0, 15.0, -1.0, 20.0);
  EXPECT_EQ(saturate(-0.5, s), -1.0);
  EXPECT_EQ(saturate(3.0, s), 3.0);
  EXPECT_EQ(saturate(15.0, s), 15.0);
  EXPECT_EQ(saturate(15.5, s), 20.0);
  EXPECT_EQ(saturate(1e300, SaturationSpec::linear()), 1e300);
}

TEST(Saturation, OrderingViolationRejected) {
  EXPECT_THROW(SaturationSpec::make(1.0, 0.0, 0.0, 2.0), Error);
  EXPECT_THROW(SaturationSpec::make(0.0, 1.0, 0.5, 2.0), Error);
  EXPECT_FALSE(describe_violation(SaturationSpec::censored(0.0, 15.0)).size());
}

TEST(Link, LinearSpecIsIdentity) {
  for (double x : {-7.0, -1.0, 0.0, 0.3, 12.0}) {
    EXPECT_EQ(g_mean(x, SaturationSpec::linear(), NoiseModel::gaussian(2.5)), x);
    EXPECT_EQ(g_deriv(x, SaturationSpec::linear(), NoiseModel::gaussian(2.5)), 1.0);
    EXPECT_EQ(sigma_var(x, SaturationSpec::linear(), NoiseModel::gaussian(2.5)), 2.5);
  }
}

TEST(Link, CensoredGaussianMatchesQuadrature) {
  const auto s = SaturationSpec::censored(0.0, 15.0);
  for (double x = -10.0; x <= 25.0; x += 0.7) {
    EXPECT_NEAR(g_mean(x, s, kStd), oracle_mean(x, s, 1.0), 1e-9) << x;
    EXPECT_NEAR(sigma_var(x, s, kStd), oracle_var(x, s, 1.0), 1e-9) << x;
  }
}

TEST(Link, AsymmetricClampsMatchQuadrature) {
  const auto s = SaturationSpec::make(-1.0, 2.0, -3.0, 5.0);
  const double sd = std::sqrt(0.7);
  const auto noise = NoiseModel::gaussian(0.7);
  for (double x = -6.0; x <= 6.0; x += 0.37) {
    EXPECT_NEAR(g_mean(x, s, noise), oracle_mean(x, s, sd), 1e-9) << x;
    EXPECT_NEAR(sigma_var(x, s, noise), oracle_var(x, s, sd), 1e-9) << x;
    const double h = 1e-5;
    const double fd = (oracle_mean(x + h, s, sd) - oracle_mean(x - h, s, sd)) / (2 * h);
    EXPECT_NEAR(g_deriv(x, s, noise), fd, 1e-6) << x;
  }
}

TEST(Link, TabulatedLawAgreesWithGaussianClosedForm) {
  std::vector<double> grid, cdf, pdf;
  for (int i = 0; i <= 4000; ++i) {
    const double z = -10.0 + 20.0 * i / 4000.0;
    grid.push_back(z);
    cdf.push_back(oracle::phi_cdf(z, 1.0));
    pdf.push_back(oracle::phi_pdf(z, 1.0));
  }
  cdf.front() = 0.0;
  cdf.back() = 1.0;
  const auto tab = NoiseModel::tabulated(grid, cdf, pdf);
  const auto s = SaturationSpec::censored(0.0, 15.0);
  for (double x : {-2.0, 0.0, 1.5, 7.0, 14.0}) {
    // piecewise-linear interpolation error of the table dominates
    EXPECT_NEAR(g_mean(x, s, tab), g_mean(x, s, kStd), 1e-5) << x;
    EXPECT_NEAR(sigma_var(x, s, tab), sigma_var(x, s, kStd), 1e-4) << x;
  }
}

TEST(Link, TabulatedValidation) {
  EXPECT_THROW(NoiseModel::tabulated({0.0, 1.0}, {0.0, 0.5}, {1.0, 1.0}), Error);
  EXPECT_THROW(NoiseModel::tabulated({1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}), Error);
}

TEST(Link, FourthMomentOfLinearGaussian) {
  EXPECT_NEAR(central_moment4(0.4, SaturationSpec::linear(), NoiseModel::gaussian(2.0)), 3.0 * 4.0, 1e-9);
}

TEST(Link, FourthMomentCensoredMatchesQuadrature) {
  const auto s = SaturationSpec::censored(0.0, 15.0);
  for (double x : {-1.0, 0.5, 3.0, 14.8}) {
    const double m = oracle_mean(x, s, 1.0);
    const double ref = oracle::saturated_expectation([m](double v) { return std::pow(v - m, 4); }, x, s.l, s.u, s.L,
                                                     s.U, 1.0);
    EXPECT_NEAR(central_moment4(x, s, kStd), ref, 1e-8) << x;
  }
}

TEST(Link, BoundsBracketDerivative) {
  const auto s = SaturationSpec::censored(0.0, 15.0);
  const auto b = g_bounds(4.0, s, kStd);
  for (double x = -4.0; x <= 4.0; x += 0.01) {
    EXPECT_LE(b.g_lo, g_deriv(x, s, kStd) + 1e-12);
    EXPECT_GE(b.g_hi, g_deriv(x, s, kStd) - 1e-12);
  }
  EXPECT_NEAR(b.g_lo, g_deriv(-4.0, s, kStd), 1e-12);
  EXPECT_GT(b.rho, 0.0);
}

TEST(Link, BinaryWithoutNoiseSpreadViolatesAssumption) {
  // U == L: the link is constant, no positive derivative bound exists.
  EXPECT_THROW(g_bounds(1.0, SaturationSpec::make(0.0, 0.0, 0.0, 0.0), kStd), Error);
}

TEST(Special, Chi2QuantileMatchesKnownValues) {
  EXPECT_NEAR(chi2_quantile(0.95, 1), 3.841458820694124, 1e-9);
  EXPECT_NEAR(chi2_quantile(0.95, 2), 5.991464547107979, 1e-9);
  EXPECT_NEAR(chi2_quantile(0.95, 10), 18.307038053275146, 1e-9);
  EXPECT_THROW(chi2_quantile(1.0, 2), Error);
}
