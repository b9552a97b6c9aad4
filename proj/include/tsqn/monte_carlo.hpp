#pragma once

#include <cstdint>
#include <vector>

#include "tsqn/diagnostics.hpp"
#include "tsqn/simulation.hpp"

namespace tsqn {

/// Replication design: theta ~ U(D), i.i.d. noise, fixed regressors and saturations.
struct McDesign {
  std::size_t K = 2000;
  /// Estimator used in every replication; its domain is also the prior support.
  EstimatorConfig estimator;
  std::vector<Vector> regressors;  ///< phi_0 .. phi_{n-1}
  SpecSchedule specs{SaturationSpec::linear()};
  std::uint64_t seed = 0;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;

  std::size_t n() const { return regressors.size(); }
  void validate() const;
};

/// theta - theta_hat_n of replication i (seeded by substream_seed(design.seed, i)).
Vector replicate_error(const McDesign& design, std::size_t i);

/// K x m matrix of estimation errors; row i is replication i whatever the thread schedule.
Matrix replicate_errors(const McDesign& design);

/// Smallest sample v with F_K(v) >= p; the minimum for p <= 0, the maximum for p >= 1.
double empirical_quantile(std::vector<double> samples, double p);

/// sqrt((ln 2 - ln t) / (2K)).
double hoeffding_upsilon(std::size_t K, double t);

/// Per-component [z_K(alpha/2 - u), z_K(1 - alpha/2 + u)] for theta - theta_hat.
/// With `theta_hat` the intervals are shifted to cover theta itself.
ConfidenceReport mc_interval(const Matrix& errors, double alpha, double t, const Vector* theta_hat = nullptr);

}  // namespace tsqn
