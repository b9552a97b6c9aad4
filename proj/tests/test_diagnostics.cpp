#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsqn/diagnostics.hpp"
#include "tsqn/error.hpp"
#include "tsqn/special.hpp"

using namespace tsqn;

namespace {

std::vector<ObservationRecord> linear_records(int n, Eigen::Index m, const Vector& theta, std::uint64_t seed,
                                              double noise_sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<ObservationRecord> out;
  for (int k = 0; k < n; ++k) {
    Vector phi(m);
    for (Eigen::Index i = 0; i < m; ++i) phi(i) = nd(rng);
    out.push_back({phi, SaturationSpec::linear(), phi.dot(theta) + noise_sd * nd(rng)});
  }
  return out;
}

EstimatorConfig wide_config(Eigen::Index m, double p0 = 1.0) {
  return EstimatorConfig::defaults(DomainSet::cube(m, 50.0), NoiseModel::gaussian(1.0), p0);
}

}  // namespace

TEST(Regret, ZeroForPerfectPredictor) {
  Vector theta(2);
  theta << 0.5, -1.0;
  auto cfg = wide_config(2);
  cfg.theta0 = cfg.theta0_bar = theta;
  const auto recs = linear_records(5, 2, theta, 1);
  const auto trace = trace_run(cfg, recs, theta);
  EXPECT_EQ(regret(trace, 0), 0.0);
  EXPECT_EQ(regret(trace, 0, Layer::Preliminary), 0.0);
}

TEST(Regret, LinearSpecIsSquaredProjectedError) {
  Vector theta(2);
  theta << 0.5, -1.0;
  const auto recs = linear_records(20, 2, theta, 2);
  const auto trace = trace_run(wide_config(2), recs, theta);
  double total = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double e = trace.steps[k].phi.dot(theta - trace.steps[k].theta_hat);
    EXPECT_NEAR(regret(trace, k), e * e, 1e-12);
    total += e * e;
  }
  EXPECT_NEAR(cumulative_regret(trace, trace.size()), total, 1e-10);
}

TEST(Regret, NeedsTruth) {
  const auto recs = linear_records(3, 1, Vector::Ones(1), 3);
  const auto trace = trace_run(wide_config(1), recs);
  try {
    regret(trace, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Mode);
  }
}

TEST(Innovation, LinearResidual) {
  Vector theta(2), phi(2);
  theta << 1.0, 2.0;
  phi << 0.5, -0.25;
  EXPECT_DOUBLE_EQ(innovation({phi, SaturationSpec::linear(), 3.0}, theta, NoiseModel::gaussian(1.0)), 3.0);
  const auto spec = SaturationSpec::censored(0.0, 15.0);
  const double y = g_mean(phi.dot(theta), spec, NoiseModel::gaussian(1.0));
  EXPECT_EQ(innovation({phi, spec, y}, theta, NoiseModel::gaussian(1.0)), 0.0);
}

TEST(Innovation, GaussianRunHasZeroMean) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  Vector theta(2);
  theta << 1.0, 0.5;
  const auto spec = SaturationSpec::censored(0.0, 15.0);
  const auto noise = NoiseModel::gaussian(1.0);
  double sum = 0.0, sumsq = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    Vector phi(2);
    phi << nd(rng), nd(rng);
    const double w = innovation({phi, spec, saturate(phi.dot(theta) + nd(rng), spec)}, theta, noise);
    sum += w;
    sumsq += w * w;
  }
  const double sd = std::sqrt(sumsq / n);
  EXPECT_LT(std::abs(sum / n), 3.0 * sd / std::sqrt(n));
}

TEST(Excitation, OrthonormalRegressorsConverge) {
  std::vector<ObservationRecord> recs;
  for (int k = 0; k < 300; ++k) {
    Vector phi = Vector::Zero(3);
    phi(k % 3) = 1.0;
    recs.push_back({phi, SaturationSpec::linear(), 0.0});
  }
  const auto trace = trace_run(wide_config(3), recs);
  const auto a = excitation_ratio(trace, 30), b = excitation_ratio(trace, 300);
  EXPECT_LT(b.ratio, a.ratio);
  EXPECT_FALSE(b.non_convergent);
  // accumulator is (lambda0 + n/3) I at multiples of 3
  EXPECT_NEAR(b.lambda_min, trace.lambda0 + 100.0, 1e-9);
  EXPECT_NEAR(b.ratio, std::log(trace.lambda0 + 100.0) / (trace.lambda0 + 100.0), 1e-12);
}

TEST(Excitation, SingleDirectionFlagged) {
  std::vector<ObservationRecord> recs;
  Vector phi(2);
  phi << 1.0, 1.0;
  for (int k = 0; k < 100; ++k) recs.push_back({phi, SaturationSpec::linear(), 0.0});
  const auto trace = trace_run(wide_config(2), recs);
  const auto r = excitation_ratio(trace, 100);
  EXPECT_NEAR(r.lambda_min, trace.lambda0, 1e-9);
  EXPECT_TRUE(r.non_convergent);
}

TEST(Qhat, LinearIsInverseGram) {
  const auto recs = linear_records(40, 3, Vector::Ones(3), 4);
  Matrix gram = Matrix::Zero(3, 3);
  for (const auto& r : recs) gram += r.phi * r.phi.transpose();
  const Matrix Q = qhat(recs, NoiseModel::gaussian(1.0), Vector::Zero(3));
  EXPECT_LT((Q - gram.inverse()).norm(), 1e-10 * gram.inverse().norm());
  EXPECT_LT((Q - Q.transpose()).norm(), 1e-15);
}

TEST(Qhat, BinaryEqualsFisherInformation) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd;
  Vector theta(2);
  theta << 0.4, -0.3;
  std::vector<ObservationRecord> recs;
  Matrix fisher = Matrix::Zero(2, 2);
  for (int k = 0; k < 50; ++k) {
    Vector phi(2);
    phi << nd(rng), nd(rng);
    recs.push_back({phi, SaturationSpec::binary(), 1.0});
    // P(y=1) = 1 - F(-x): Fisher weight f(x)^2 / (p (1 - p))
    const double x = phi.dot(theta);
    const double p = oracle::phi_cdf(x, 1.0);
    const double f = oracle::phi_pdf(x, 1.0);
    fisher += f * f / (p * (1.0 - p)) * phi * phi.transpose();
  }
  const Matrix Q = qhat(recs, NoiseModel::gaussian(1.0), theta);
  EXPECT_LT((Q.inverse() - fisher).norm(), 1e-10 * fisher.norm());
}

TEST(Qhat, SingularSumNamesDirection) {
  std::vector<ObservationRecord> recs;
  Vector phi(2);
  phi << 1.0, 0.0;
  for (int k = 0; k < 5; ++k) recs.push_back({phi, SaturationSpec::linear(), 0.0});
  try {
    qhat(recs, NoiseModel::gaussian(1.0), Vector::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Assumption);
    EXPECT_NE(std::string(e.what()).find("null directions"), std::string::npos);
  }
}

TEST(AsymptoticCi, ScalarLinearMatchesLeastSquaresInterval) {
  const auto recs = linear_records(200, 1, Vector::Constant(1, 0.7), 12, 1.5);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& r : recs) {
    sxx += r.phi(0) * r.phi(0);
    sxy += r.phi(0) * r.y;
  }
  const Vector ls = Vector::Constant(1, sxy / sxx);
  const auto noise = NoiseModel::gaussian(2.25);
  const auto rep = asymptotic_ci(recs, noise, ls, 0.05);
  const double half = 1.959963984540054 * 1.5 / std::sqrt(sxx);
  EXPECT_NEAR(rep.lower[0], ls(0) - half, 1e-9);
  EXPECT_NEAR(rep.upper[0], ls(0) + half, 1e-9);
}

TEST(AsymptoticCi, WidthsGrowAsAlphaShrinks) {
  const auto recs = linear_records(100, 2, Vector::Ones(2), 13);
  const auto trace = trace_run(wide_config(2), recs);
  double last = 0.0;
  for (double alpha : {0.5, 0.1, 0.01, 1e-4, 1e-8}) {
    const auto rep = asymptotic_ci(trace, trace.size(), alpha);
    const double w = rep.upper[0] - rep.lower[0];
    EXPECT_GT(w, last);
    last = w;
  }
}

TEST(Lyapunov, PreconditionAndMode) {
  const auto recs = linear_records(10, 1, Vector::Constant(1, 0.5), 14);
  const auto big_prior = trace_run(wide_config(1, 1.0), recs, Vector::Constant(1, 0.5));
  try {
    lyapunov_bound(big_prior, 5, 0.05, 0.1, Plugin::Estimate);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
  const auto no_truth = trace_run(wide_config(1, 0.1), recs);
  try {
    lyapunov_bound(no_truth, 5, 0.05, 0.1, Plugin::TrueTheta);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Mode);
  }
}

TEST(Lyapunov, BoundsGrowAsAlphaShrinks) {
  const Vector theta = Vector::Constant(2, 0.5);
  std::vector<ObservationRecord> recs;
  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd;
  const auto spec = SaturationSpec::censored(0.0, 15.0);
  for (int k = 0; k < 30; ++k) {
    Vector phi(2);
    phi << nd(rng), nd(rng);
    recs.push_back({phi, spec, saturate(phi.dot(theta) + 3.0 + nd(rng), spec)});
  }
  auto cfg = EstimatorConfig::defaults(DomainSet::cube(2, 3.0), NoiseModel::gaussian(1.0), 0.1);
  const auto trace = trace_run(cfg, recs, theta);
  std::vector<double> last(2, 0.0);
  for (double alpha : {0.4, 0.2, 0.05, 0.01}) {
    for (auto plugin : {Plugin::TrueTheta, Plugin::Estimate, Plugin::WorstCase}) {
      const auto c = lyapunov_constants(trace, 20, alpha, 0.1, plugin);
      for (double b : c.squared_error_bound) EXPECT_GT(b, 0.0);
    }
    const auto c = lyapunov_constants(trace, 20, alpha, 0.1, Plugin::TrueTheta);
    for (int j = 0; j < 2; ++j) {
      EXPECT_GT(c.squared_error_bound[j], last[j]);
      last[j] = c.squared_error_bound[j];
    }
  }
  // replaying the same trace reproduces the constants exactly
  const auto a = lyapunov_constants(trace, 20, 0.05, 0.1, Plugin::Estimate);
  const auto b = lyapunov_constants(trace_run(cfg, recs, theta), 20, 0.05, 0.1, Plugin::Estimate);
  EXPECT_EQ(a.C, b.C);
  EXPECT_EQ(a.squared_error_bound, b.squared_error_bound);
}
