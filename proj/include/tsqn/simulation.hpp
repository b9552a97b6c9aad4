#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tsqn/diagnostics.hpp"

namespace tsqn {

/// Seed of substream `index` derived from a base seed (splitmix64 mixing).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

using Rng = std::mt19937_64;

/// One draw of the noise; tabulated laws are sampled by inverse CDF.
double sample_noise(const NoiseModel& noise, Rng& rng);
/// Uniform draw from the parameter set.
Vector sample_uniform(const DomainSet& D, Rng& rng);

/// Saturation schedule: a single entry applies to every step, otherwise entry k applies to step k.
using SpecSchedule = std::vector<SaturationSpec>;
const SaturationSpec& spec_at(const SpecSchedule& schedule, std::size_t k);

struct ScenarioConfig {
  Matrix A;
  /// Components 2..m of u_k have scale input_scale / k^{1/4} (input_scale at k = 0).
  double input_scale = 5.0;
  Vector theta_true;
  SpecSchedule specs{SaturationSpec::censored(0.0, 15.0)};
  NoiseModel noise;
  std::size_t n = 10000;
  std::uint64_t seed = 0;

  Eigen::Index dimension() const { return A.rows(); }
  /// Throws Error(Config) when A is not square, unstable, or theta_true / specs mismatch.
  void validate() const;

  /// The diminishing-excitation experiment: m = 10, diagonal A, censoring to [0, 15], N(0,1) noise.
  static ScenarioConfig reference(std::uint64_t seed = 0, std::size_t n = 10000);
};

/// Box |theta_i| <= 2 of the reference experiment.
DomainSet reference_domain();

/// phi_0 = 0, phi_{k+1} = A phi_k + u_k; returns phi_0 .. phi_{n-1}.
std::vector<Vector> gen_regressors(const ScenarioConfig& scenario);

/// y_{k+1} = S_k(phi_k^T theta + e_{k+1}), e i.i.d. from `noise`.
std::vector<ObservationRecord> gen_observations(const std::vector<Vector>& regressors, const Vector& theta,
                                                const SpecSchedule& specs, const NoiseModel& noise,
                                                std::uint64_t seed);

/// Regressors, observations, then a traced estimator run with the truth attached.
RunTrace run_experiment(const ScenarioConfig& scenario, const EstimatorConfig& config);

/// Error norms and running-average regret of both layers after each step (index k is after step k).
struct ExperimentCurves {
  std::vector<double> error_bar;
  std::vector<double> error_hat;
  std::vector<double> avg_regret_bar;
  std::vector<double> avg_regret_hat;
};
ExperimentCurves experiment_curves(const RunTrace& trace);

}  // namespace tsqn
