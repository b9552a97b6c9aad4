#pragma once

#include <cstdint>
#include <string>

#include "tsqn/geometry.hpp"
#include "tsqn/link.hpp"

namespace tsqn {

/// One step of data: regressor phi_k, the saturation in force, and the output y_{k+1}.
struct ObservationRecord {
  Vector phi;
  SaturationSpec spec;
  double y = 0.0;
};

/// Regularization factor mu_k of the accelerated layer.
struct MuPolicy {
  enum class Kind { Constant, Adaptive };
  Kind kind = Kind::Adaptive;
  double value = 1.0;  ///< constant policy
  double min = 1e-6;   ///< adaptive clip window
  double max = 1e6;

  static MuPolicy constant(double mu) { return {Kind::Constant, mu, mu, mu}; }
  static MuPolicy adaptive(double lo = 1e-6, double hi = 1e6) { return {Kind::Adaptive, 1.0, lo, hi}; }
};

struct EstimatorConfig {
  DomainSet domain = DomainSet::cube(1, 1.0);
  NoiseModel noise;
  MuPolicy mu = MuPolicy::adaptive();
  Matrix P0_bar;
  Matrix P0;
  Vector theta0_bar;
  Vector theta0;
  double beta_tie_epsilon = 1e-12;
  double M_inflation = 1.05;
  /// Step 2 uses the freshly updated preliminary estimate when true, the pre-update one otherwise.
  bool beta_uses_updated_bar = true;
  /// Every this many steps P and P_bar are recomputed from their maintained inverses.
  int resync_interval = 1000;
  LinkTolerances link;
  ProjectionOptions projection;

  /// Box-center start, P0 = P0_bar = p0_scale * I.
  static EstimatorConfig defaults(DomainSet domain, NoiseModel noise, double p0_scale = 100.0);

  /// Throws Error(Config) describing the first violated invariant.
  void validate() const;
  Eigen::Index dimension() const { return domain.dimension(); }
};

/// Scalars of the latest update.
struct Gains {
  double beta_bar = 0.0;
  double a_bar = 0.0;
  double beta = 0.0;
  double a = 0.0;
  double mu = 0.0;
  double g_lo = 0.0;
  double g_hi = 0.0;
  double M = 0.0;
  bool beta_tie = false;
};

struct EstimatorState {
  Vector theta_bar;
  Matrix P_bar;
  Matrix P_bar_inv;
  Vector theta_hat;
  Matrix P;
  Matrix P_inv;
  std::int64_t k = 0;
  Gains last_gains;
  /// sum phi phi^T + lambda0 I
  Matrix info_accumulator;
  double lambda0 = 0.0;
  double logdet_P_inv = 0.0;
  double logdet_P_bar_inv = 0.0;
};

struct StepReport {
  std::int64_t k = 0;
  double prediction = 0.0;      ///< G(phi^T theta_hat_k)
  double prediction_bar = 0.0;  ///< G(phi^T theta_bar_k)
  double residual = 0.0;        ///< y - prediction
  Gains gains;
  double phi_P_bar_phi = 0.0;  ///< phi^T P_bar_k phi
  double phi_P_phi = 0.0;      ///< phi^T P_k phi
  Vector theta_bar_before;
  Vector theta_bar_unprojected;
  Vector theta_bar_after;
  Vector theta_hat_before;
  Vector theta_hat_unprojected;
  Vector theta_hat_after;
  bool bar_projection_active = false;
  bool hat_projection_active = false;
};

/// Two-step quasi-Newton estimator: a conservative preliminary layer whose
/// gains come from worst-case link-derivative bounds, and an accelerated layer
/// whose gain is the link's difference quotient between the two estimates.
///
/// Single writer: updates must be applied in record order.
class TsqnEstimator {
 public:
  explicit TsqnEstimator(EstimatorConfig config);

  /// Preliminary layer on one record.
  void step1_update(const ObservationRecord& record);
  /// Accelerated layer; requires step1_update for the same record first.
  void step2_update(const ObservationRecord& record);
  /// step1 then step2, plus the information accumulator.
  StepReport update(const ObservationRecord& record);

  /// Adaptive predictor G(phi^T theta_hat).
  double predict(const Vector& phi, const SaturationSpec& spec) const;

  const EstimatorState& state() const { return state_; }
  const EstimatorConfig& config() const { return config_; }

  /// Replace the state wholesale (checkpoint restore). Dimensions are checked.
  void restore(EstimatorState state);

 private:
  void check_record(const ObservationRecord& record) const;
  void resync();

  EstimatorConfig config_;
  EstimatorState state_;
  // Values carried from step1 to step2 of the same record.
  bool step1_pending_ = false;
  Vector theta_bar_before_;
  Vector theta_bar_unprojected_;
  double phi_P_bar_phi_ = 0.0;
  bool bar_projected_ = false;
  // Last step2 details for the report.
  Vector theta_hat_unprojected_;
  double phi_P_phi_ = 0.0;
  bool hat_projected_ = false;
};

}  // namespace tsqn
