#include "tsqn/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsqn/error.hpp"

namespace tsqn {

namespace {

void require_spd(const Matrix& P, Eigen::Index m, const char* name) {
  if (P.rows() != m || P.cols() != m) {
    std::ostringstream os;
    os << name << " must be " << m << "x" << m;
    throw Error(ErrorCode::Config, os.str());
  }
  if (!P.allFinite() || (P - P.transpose()).norm() > 1e-12 * std::max(1.0, P.norm())) {
    throw Error(ErrorCode::Config, std::string(name) + " must be finite and symmetric");
  }
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::Config, std::string(name) + " must be positive definite");
}

Matrix spd_inverse(const Matrix& P) {
  Eigen::LLT<Matrix> llt(P);
  Matrix inv = llt.solve(Matrix::Identity(P.rows(), P.cols()));
  return 0.5 * (inv + inv.transpose());
}

double log_det_spd(const Matrix& P) {
  Eigen::LLT<Matrix> llt(P);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

EstimatorConfig EstimatorConfig::defaults(DomainSet domain, NoiseModel noise, double p0_scale) {
  EstimatorConfig c;
  const auto m = domain.dimension();
  c.theta0 = domain.center();
  c.theta0_bar = domain.center();
  c.P0 = p0_scale * Matrix::Identity(m, m);
  c.P0_bar = p0_scale * Matrix::Identity(m, m);
  c.domain = std::move(domain);
  c.noise = std::move(noise);
  return c;
}

void EstimatorConfig::validate() const {
  const auto m = dimension();
  require_spd(P0_bar, m, "P0_bar");
  require_spd(P0, m, "P0");
  if (theta0.size() != m || theta0_bar.size() != m) {
    throw Error(ErrorCode::Config, "initial estimates must match the domain dimension");
  }
  if (!domain.contains(theta0) || !domain.contains(theta0_bar)) {
    throw Error(ErrorCode::Config, "initial estimates must lie in the parameter domain");
  }
  if (mu.kind == MuPolicy::Kind::Constant) {
    if (!(mu.value > 0.0) || !std::isfinite(mu.value)) throw Error(ErrorCode::Config, "constant mu must be positive");
  } else if (!(mu.min > 0.0) || !(mu.min <= mu.max) || !std::isfinite(mu.max)) {
    throw Error(ErrorCode::Config, "adaptive mu needs 0 < mu_min <= mu_max < inf");
  }
  if (!(beta_tie_epsilon >= 0.0)) throw Error(ErrorCode::Config, "beta_tie_epsilon must be nonnegative");
  if (!(M_inflation >= 1.0) || !std::isfinite(M_inflation)) {
    throw Error(ErrorCode::Config, "M_inflation must be a finite value >= 1");
  }
  if (resync_interval < 1) throw Error(ErrorCode::Config, "resync_interval must be >= 1");
}

TsqnEstimator::TsqnEstimator(EstimatorConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto m = config_.dimension();
  state_.theta_bar = config_.theta0_bar;
  state_.P_bar = config_.P0_bar;
  state_.P_bar_inv = spd_inverse(config_.P0_bar);
  state_.theta_hat = config_.theta0;
  state_.P = config_.P0;
  state_.P_inv = spd_inverse(config_.P0);
  state_.logdet_P_inv = -log_det_spd(config_.P0);
  state_.logdet_P_bar_inv = -log_det_spd(config_.P0_bar);
  // lambda0 strictly above ||P0^{-1}|| = 1 / lambda_min(P0).
  Eigen::SelfAdjointEigenSolver<Matrix> es(config_.P0, Eigen::EigenvaluesOnly);
  state_.lambda0 = (1.0 / es.eigenvalues().minCoeff()) * (1.0 + 1e-6);
  state_.info_accumulator = state_.lambda0 * Matrix::Identity(m, m);
}

void TsqnEstimator::check_record(const ObservationRecord& r) const {
  std::ostringstream os;
  if (r.phi.size() != config_.dimension()) {
    os << "step " << state_.k << ": regressor has dimension " << r.phi.size() << ", expected "
       << config_.dimension();
    throw Error(ErrorCode::Data, os.str());
  }
  if (!r.phi.allFinite()) {
    os << "step " << state_.k << ": regressor is not finite";
    throw Error(ErrorCode::Data, os.str());
  }
  if (auto why = describe_violation(r.spec); !why.empty()) {
    os << "step " << state_.k << ": " << why;
    throw Error(ErrorCode::Data, os.str());
  }
  if (!std::isfinite(r.y) || r.y < r.spec.L - 1e-9 || r.y > r.spec.U + 1e-9) {
    os << "step " << state_.k << ": observation " << r.y << " outside clamp range [" << r.spec.L << ", "
       << r.spec.U << "]";
    throw Error(ErrorCode::Data, os.str());
  }
}

void TsqnEstimator::step1_update(const ObservationRecord& r) {
  check_record(r);
  if (step1_pending_) throw Error(ErrorCode::Config, "step1_update called twice without step2_update");
  const auto& noise = config_.noise;
  const Vector& phi = r.phi;
  auto& s = state_;
  Gains& g = s.last_gains;

  const Vector Pphi = s.P_bar * phi;
  const double quad = phi.dot(Pphi);
  g.M = sup_abs_inner(phi, config_.domain) * config_.M_inflation;
  if (g.M > 0.0) {
    const LinkBounds b = g_bounds(g.M, r.spec, noise, config_.link, false);
    g.g_lo = b.g_lo;
    g.g_hi = b.g_hi;
  } else {
    g.g_lo = g.g_hi = g_deriv(0.0, r.spec, noise);
  }
  g.beta_bar = std::min(g.g_lo, 1.0 / (2.0 * g.g_hi * quad + 1.0));
  g.a_bar = 1.0 / (1.0 + g.beta_bar * g.beta_bar * quad);

  const double resid = r.y - g_mean(phi.dot(s.theta_bar), r.spec, noise, config_.link);
  theta_bar_before_ = s.theta_bar;
  theta_bar_unprojected_ = s.theta_bar + (g.a_bar * g.beta_bar * resid) * Pphi;

  const double bb2 = g.beta_bar * g.beta_bar;
  s.P_bar.noalias() -= (g.a_bar * bb2) * Pphi * Pphi.transpose();
  s.P_bar = 0.5 * (s.P_bar + s.P_bar.transpose());
  s.P_bar_inv.noalias() += bb2 * phi * phi.transpose();
  s.logdet_P_bar_inv += std::log1p(bb2 * quad);

  s.theta_bar = q_project(theta_bar_unprojected_, s.P_bar_inv, s.P_bar, config_.domain, config_.projection);
  bar_projected_ = !(s.theta_bar.array() == theta_bar_unprojected_.array()).all();
  phi_P_bar_phi_ = quad;
  step1_pending_ = true;
}

void TsqnEstimator::step2_update(const ObservationRecord& r) {
  if (!step1_pending_) throw Error(ErrorCode::Config, "step2_update requires step1_update on the same record");
  check_record(r);
  const auto& noise = config_.noise;
  const auto& tol = config_.link;
  const Vector& phi = r.phi;
  auto& s = state_;
  Gains& g = s.last_gains;

  const double x_hat = phi.dot(s.theta_hat);
  const double x_bar = phi.dot(config_.beta_uses_updated_bar ? s.theta_bar : theta_bar_before_);
  const double G_hat = g_mean(x_hat, r.spec, noise, tol);
  const double tie = config_.beta_tie_epsilon * std::max(1.0, std::abs(x_hat));
  if (std::abs(x_hat - x_bar) > tie) {
    g.beta = (g_mean(x_bar, r.spec, noise, tol) - G_hat) / (x_bar - x_hat);
    g.beta_tie = false;
  } else {
    g.beta = g_deriv(x_hat, r.spec, noise);
    g.beta_tie = true;
  }
  if (config_.mu.kind == MuPolicy::Kind::Constant) {
    g.mu = config_.mu.value;
  } else {
    g.mu = std::clamp(sigma_var(x_hat, r.spec, noise, tol), config_.mu.min, config_.mu.max);
  }

  const Vector Pphi = s.P * phi;
  const double quad = phi.dot(Pphi);
  const double b2 = g.beta * g.beta;
  g.a = 1.0 / (g.mu + b2 * quad);
  const double resid = r.y - G_hat;
  theta_hat_unprojected_ = s.theta_hat + (g.a * g.beta * resid) * Pphi;

  s.P.noalias() -= (g.a * b2) * Pphi * Pphi.transpose();
  s.P = 0.5 * (s.P + s.P.transpose());
  s.P_inv.noalias() += (b2 / g.mu) * phi * phi.transpose();
  s.logdet_P_inv += std::log1p(b2 * quad / g.mu);

  s.theta_hat = q_project(theta_hat_unprojected_, s.P_inv, s.P, config_.domain, config_.projection);
  hat_projected_ = !(s.theta_hat.array() == theta_hat_unprojected_.array()).all();
  phi_P_phi_ = quad;

  step1_pending_ = false;
  ++s.k;
  if (s.k % config_.resync_interval == 0) resync();
}

StepReport TsqnEstimator::update(const ObservationRecord& r) {
  check_record(r);
  StepReport rep;
  rep.k = state_.k;
  rep.theta_bar_before = state_.theta_bar;
  rep.theta_hat_before = state_.theta_hat;
  rep.prediction = predict(r.phi, r.spec);
  rep.prediction_bar = g_mean(r.phi.dot(state_.theta_bar), r.spec, config_.noise, config_.link);
  rep.residual = r.y - rep.prediction;

  step1_update(r);
  step2_update(r);
  state_.info_accumulator.noalias() += r.phi * r.phi.transpose();

  rep.gains = state_.last_gains;
  rep.phi_P_bar_phi = phi_P_bar_phi_;
  rep.phi_P_phi = phi_P_phi_;
  rep.theta_bar_unprojected = theta_bar_unprojected_;
  rep.theta_bar_after = state_.theta_bar;
  rep.theta_hat_unprojected = theta_hat_unprojected_;
  rep.theta_hat_after = state_.theta_hat;
  rep.bar_projection_active = bar_projected_;
  rep.hat_projection_active = hat_projected_;
  return rep;
}

double TsqnEstimator::predict(const Vector& phi, const SaturationSpec& spec) const {
  if (phi.size() != config_.dimension()) throw Error(ErrorCode::Data, "predict: regressor dimension mismatch");
  return g_mean(phi.dot(state_.theta_hat), spec, config_.noise, config_.link);
}

void TsqnEstimator::resync() {
  // The inverses only ever receive PSD additions, so they are the better-conditioned copies.
  state_.P = spd_inverse(state_.P_inv);
  state_.P_bar = spd_inverse(state_.P_bar_inv);
}

void TsqnEstimator::restore(EstimatorState state) {
  const auto m = config_.dimension();
  auto square = [m](const Matrix& A) { return A.rows() == m && A.cols() == m; };
  if (state.theta_bar.size() != m || state.theta_hat.size() != m || !square(state.P) || !square(state.P_inv) ||
      !square(state.P_bar) || !square(state.P_bar_inv) || !square(state.info_accumulator)) {
    throw Error(ErrorCode::Schema, "restored estimator state has inconsistent dimensions");
  }
  state_ = std::move(state);
  step1_pending_ = false;
}

}  // namespace tsqn
