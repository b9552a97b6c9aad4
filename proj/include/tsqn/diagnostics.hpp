#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsqn/estimator.hpp"

namespace tsqn {

/// Everything recorded about one estimator step k (record k, output y_{k+1}).
struct TraceStep {
  std::int64_t k = 0;
  Vector phi;
  SaturationSpec spec;
  double y = 0.0;
  Vector theta_bar;       ///< theta_bar_k (before the step)
  Vector theta_hat;       ///< theta_hat_k
  Vector theta_bar_next;  ///< theta_bar_{k+1}
  Vector theta_hat_next;  ///< theta_hat_{k+1}
  Gains gains;
  double prediction = 0.0;      ///< G(phi^T theta_hat_k)
  double prediction_bar = 0.0;  ///< G(phi^T theta_bar_k)
  double phi_P_phi = 0.0;
  double phi_P_bar_phi = 0.0;
  Vector P_diag_next;  ///< diagonal of P_{k+1}
  double logdet_P_inv_next = 0.0;
  double logdet_P_bar_inv_next = 0.0;
  double lambda_min_P_inv = 0.0;      ///< lambda_min(P_k^{-1})
  double lambda_min_P_bar_inv = 0.0;  ///< lambda_min(P_bar_k^{-1})
  double info_lambda_min = 0.0;       ///< of sum_{i<=k} phi phi^T + lambda0 I
  double info_lambda_max = 0.0;
};

struct RunTrace {
  EstimatorConfig config;
  std::optional<Vector> truth;  ///< known only in simulation mode
  std::string config_hash;
  std::uint64_t seed = 0;
  double lambda0 = 0.0;
  std::vector<TraceStep> steps;

  std::size_t size() const { return steps.size(); }
};

RunTrace start_trace(const TsqnEstimator& estimator, std::optional<Vector> truth = std::nullopt);

/// estimator.update(record), appending the step to the trace.
StepReport traced_update(TsqnEstimator& estimator, const ObservationRecord& record, RunTrace& trace);

/// Run a fresh estimator over `records`, tracing every step.
RunTrace trace_run(const EstimatorConfig& config, std::span<const ObservationRecord> records,
                   std::optional<Vector> truth = std::nullopt);

enum class Layer { Accelerated, Preliminary };

/// R_k = (G(phi_k^T theta) - yhat_{k+1})^2; needs the true parameter.
double regret(const RunTrace& trace, std::size_t k, Layer layer = Layer::Accelerated);
/// Sum of R_i over the first n steps.
double cumulative_regret(const RunTrace& trace, std::size_t n, Layer layer = Layer::Accelerated);

/// w_{k+1} = y_{k+1} - G(phi_k^T theta).
double innovation(const ObservationRecord& record, const Vector& theta, const NoiseModel& noise,
                  const LinkTolerances& tol = {});

struct ExcitationReport {
  double ratio = 0.0;           ///< log lambda_max(n) / lambda_min(n)
  double iterated_ratio = 0.0;  ///< log log n / lambda_min(n)
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// ratio did not decrease between n/2 and n
  bool non_convergent = false;
};

/// Excitation diagnostic after the first n steps.
ExcitationReport excitation_ratio(const RunTrace& trace, std::size_t n);

/// (sum G'(phi^T theta)^2 / sigma(phi^T theta) phi phi^T)^{-1} over the records.
/// Throws Error(Assumption) naming the null directions when the sum is singular.
Matrix qhat(std::span<const ObservationRecord> records, const NoiseModel& noise, const Vector& theta,
            const LinkTolerances& tol = {});
Matrix qhat(const RunTrace& trace, std::size_t n, const Vector& theta);

struct ConfidenceReport {
  std::string method;  ///< "asymptotic" | "lyapunov" | "monte_carlo"
  double confidence = 0.0;
  std::vector<double> center;
  std::vector<double> lower;
  std::vector<double> upper;
  std::map<std::string, double> constants;
  std::map<std::string, std::string> provenance;
  std::vector<std::string> warnings;
};

/// Componentwise intervals theta_hat_n(j) +- sqrt(Qhat(j,j) * chi2_{m}(1 - alpha)).
ConfidenceReport asymptotic_ci(const RunTrace& trace, std::size_t n, double alpha);
/// Same with an explicit record set, estimate and noise (no trace needed).
ConfidenceReport asymptotic_ci(std::span<const ObservationRecord> records, const NoiseModel& noise,
                               const Vector& theta_hat, double alpha, const LinkTolerances& tol = {});

enum class Plugin { TrueTheta, Estimate, WorstCase };

/// Every constant entering the finite-sample squared-error bound.
struct LyapunovConstants {
  double sigma_b = 0.0, sigma_a = 0.0, sigma_bar_b = 0.0, sigma_bar_a = 0.0;
  double Phi = 0.0, Phi_bar = 0.0;
  double gamma = 0.0, Psi = 0.0, rho = 0.0;
  double lambda_N = 0.0, delta0 = 0.0, c0 = 0.0;
  double V0 = 0.0, V0_bar = 0.0;
  double Gamma = 0.0, Gamma_bar = 0.0, C = 0.0;
  double logdet_P0_inv = 0.0, logdet_P0_bar_inv = 0.0, logdet_P_inv_final = 0.0;
  std::vector<double> squared_error_bound;  ///< per component
  double regret_bound = 0.0;
};

/// Finite-sample bound over steps 0..N (needs N + 1 traced steps). Holds with probability >= 1 - 2 alpha.
LyapunovConstants lyapunov_constants(const RunTrace& trace, std::size_t N, double alpha, double tau, Plugin plugin);
ConfidenceReport lyapunov_bound(const RunTrace& trace, std::size_t N, double alpha, double tau, Plugin plugin);

const char* to_string(Plugin p);
Plugin plugin_from_string(const std::string& s);

}  // namespace tsqn
