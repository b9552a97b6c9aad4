#include "tsqn/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tsqn/detail/extremum.hpp"
#include "tsqn/error.hpp"
#include "tsqn/special.hpp"

namespace tsqn {

namespace {

double lambda_min(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

const Vector& require_truth(const RunTrace& trace) {
  if (!trace.truth) throw Error(ErrorCode::Mode, "this diagnostic needs the true parameter (simulation mode)");
  return *trace.truth;
}

}  // namespace

RunTrace start_trace(const TsqnEstimator& estimator, std::optional<Vector> truth) {
  RunTrace t;
  t.config = estimator.config();
  t.truth = std::move(truth);
  t.lambda0 = estimator.state().lambda0;
  return t;
}

StepReport traced_update(TsqnEstimator& est, const ObservationRecord& r, RunTrace& trace) {
  const double lmin_P_inv = lambda_min(est.state().P_inv);
  const double lmin_P_bar_inv = lambda_min(est.state().P_bar_inv);
  StepReport rep = est.update(r);
  const auto& s = est.state();

  TraceStep step;
  step.k = rep.k;
  step.phi = r.phi;
  step.spec = r.spec;
  step.y = r.y;
  step.theta_bar = rep.theta_bar_before;
  step.theta_hat = rep.theta_hat_before;
  step.theta_bar_next = s.theta_bar;
  step.theta_hat_next = s.theta_hat;
  step.gains = rep.gains;
  step.prediction = rep.prediction;
  step.prediction_bar = rep.prediction_bar;
  step.phi_P_phi = rep.phi_P_phi;
  step.phi_P_bar_phi = rep.phi_P_bar_phi;
  step.P_diag_next = s.P.diagonal();
  step.logdet_P_inv_next = s.logdet_P_inv;
  step.logdet_P_bar_inv_next = s.logdet_P_bar_inv;
  step.lambda_min_P_inv = lmin_P_inv;
  step.lambda_min_P_bar_inv = lmin_P_bar_inv;
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.info_accumulator, Eigen::EigenvaluesOnly);
  step.info_lambda_min = es.eigenvalues().minCoeff();
  step.info_lambda_max = es.eigenvalues().maxCoeff();
  trace.steps.push_back(std::move(step));
  return rep;
}

RunTrace trace_run(const EstimatorConfig& config, std::span<const ObservationRecord> records,
                   std::optional<Vector> truth) {
  TsqnEstimator est(config);
  RunTrace trace = start_trace(est, std::move(truth));
  trace.steps.reserve(records.size());
  for (const auto& r : records) traced_update(est, r, trace);
  return trace;
}

double regret(const RunTrace& trace, std::size_t k, Layer layer) {
  const Vector& theta = require_truth(trace);
  if (k >= trace.size()) throw Error(ErrorCode::Domain, "regret: step index beyond trace");
  const auto& s = trace.steps[k];
  const double best = g_mean(s.phi.dot(theta), s.spec, trace.config.noise, trace.config.link);
  const double pred = layer == Layer::Accelerated ? s.prediction : s.prediction_bar;
  return (best - pred) * (best - pred);
}

double cumulative_regret(const RunTrace& trace, std::size_t n, Layer layer) {
  require_truth(trace);
  if (n > trace.size()) throw Error(ErrorCode::Domain, "cumulative_regret: n beyond trace");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += regret(trace, i, layer);
  return total;
}

double innovation(const ObservationRecord& r, const Vector& theta, const NoiseModel& noise,
                  const LinkTolerances& tol) {
  return r.y - g_mean(r.phi.dot(theta), r.spec, noise, tol);
}

ExcitationReport excitation_ratio(const RunTrace& trace, std::size_t n) {
  if (n == 0 || n > trace.size()) throw Error(ErrorCode::Domain, "excitation_ratio: n must be in [1, trace size]");
  auto ratio_at = [&](std::size_t i) {
    const auto& s = trace.steps[i - 1];
    return std::log(s.info_lambda_max) / s.info_lambda_min;
  };
  const auto& s = trace.steps[n - 1];
  ExcitationReport rep;
  rep.lambda_min = s.info_lambda_min;
  rep.lambda_max = s.info_lambda_max;
  rep.ratio = ratio_at(n);
  rep.iterated_ratio = n >= 3 ? std::log(std::log(static_cast<double>(n))) / s.info_lambda_min : 0.0;
  const std::size_t half = std::max<std::size_t>(1, n / 2);
  rep.non_convergent = n >= 2 && !(rep.ratio < ratio_at(half));
  return rep;
}

Matrix qhat(std::span<const ObservationRecord> records, const NoiseModel& noise, const Vector& theta,
            const LinkTolerances& tol) {
  const auto m = theta.size();
  Matrix info = Matrix::Zero(m, m);
  for (const auto& r : records) {
    const double x = r.phi.dot(theta);
    const double sigma = sigma_var(x, r.spec, noise, tol);
    if (!(sigma > 0.0)) continue;  // both factors underflowed deep in a clamp region
    const double d = g_deriv(x, r.spec, noise);
    info.noalias() += (d * d / sigma) * r.phi * r.phi.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(info);
  const Vector& lam = es.eigenvalues();
  if (!(lam.minCoeff() > 1e-10)) {
    std::ostringstream os;
    os << "plug-in information sum is singular; null directions:";
    for (Eigen::Index i = 0; i < m; ++i) {
      if (lam(i) <= 1e-10) os << " [" << es.eigenvectors().col(i).transpose() << "]";
    }
    throw Error(ErrorCode::Assumption, os.str());
  }
  Matrix Q = es.eigenvectors() * lam.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (Q + Q.transpose());
}

Matrix qhat(const RunTrace& trace, std::size_t n, const Vector& theta) {
  if (n > trace.size()) throw Error(ErrorCode::Domain, "qhat: n beyond trace");
  std::vector<ObservationRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) records.push_back({trace.steps[i].phi, trace.steps[i].spec, trace.steps[i].y});
  return qhat(records, trace.config.noise, theta, trace.config.link);
}

ConfidenceReport asymptotic_ci(std::span<const ObservationRecord> records, const NoiseModel& noise,
                               const Vector& theta_hat, double alpha, const LinkTolerances& tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Domain, "asymptotic_ci: alpha must lie in (0,1)");
  const auto m = theta_hat.size();
  const Matrix Q = qhat(records, noise, theta_hat, tol);
  const double q = chi2_quantile(1.0 - alpha, static_cast<int>(m));
  ConfidenceReport rep;
  rep.method = "asymptotic";
  rep.confidence = 1.0 - alpha;
  rep.center = to_std(theta_hat);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double half = std::sqrt(Q(j, j) * q);
    rep.lower.push_back(theta_hat(j) - half);
    rep.upper.push_back(theta_hat(j) + half);
  }
  rep.constants["alpha"] = alpha;
  rep.constants["chi2_quantile"] = q;
  rep.constants["n"] = static_cast<double>(records.size());
  rep.provenance["plugin"] = "estimate";
  rep.provenance["quantile_dof"] = std::to_string(m);
  return rep;
}

ConfidenceReport asymptotic_ci(const RunTrace& trace, std::size_t n, double alpha) {
  if (n == 0 || n > trace.size()) throw Error(ErrorCode::Domain, "asymptotic_ci: n must be in [1, trace size]");
  std::vector<ObservationRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) records.push_back({trace.steps[i].phi, trace.steps[i].spec, trace.steps[i].y});
  auto rep = asymptotic_ci(records, trace.config.noise, trace.steps[n - 1].theta_hat_next, alpha, trace.config.link);
  rep.provenance["config_hash"] = trace.config_hash;
  rep.provenance["seed"] = std::to_string(trace.seed);
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-sample bound

const char* to_string(Plugin p) {
  switch (p) {
    case Plugin::TrueTheta: return "true";
    case Plugin::Estimate: return "estimate";
    case Plugin::WorstCase: return "worst";
  }
  return "?";
}

Plugin plugin_from_string(const std::string& s) {
  if (s == "true" || s == "true_theta") return Plugin::TrueTheta;
  if (s == "estimate") return Plugin::Estimate;
  if (s == "worst" || s == "worst_case") return Plugin::WorstCase;
  throw Error(ErrorCode::Config, "unknown plug-in policy '" + s + "' (expected true|estimate|worst)");
}

namespace {

/// sup over theta in D of (theta - center)^T Q (theta - center).
double sup_quadratic_over_domain(const Matrix& Q, const Vector& center, const DomainSet& D) {
  if (const auto* box = D.as_box()) {
    const auto m = box->lower.size();
    if (m > 24) throw Error(ErrorCode::Config, "worst-case plug-in: vertex enumeration limited to m <= 24");
    double best = 0.0;
    Vector v(m);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
      for (Eigen::Index i = 0; i < m; ++i) v(i) = (mask >> i) & 1 ? box->upper(i) : box->lower(i);
      const Vector d = v - center;
      best = std::max(best, d.dot(Q * d));
    }
    return best;
  }
  const auto& ball = *D.as_ball();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
  const Vector d = ball.center - center;
  const double root = std::sqrt(d.dot(Q * d)) + ball.radius * std::sqrt(es.eigenvalues().maxCoeff());
  return root * root;
}

}  // namespace

LyapunovConstants lyapunov_constants(const RunTrace& trace, std::size_t N, double alpha, double tau, Plugin plugin) {
  if (N < 1 || N >= trace.size()) {
    throw Error(ErrorCode::Domain, "lyapunov_bound: need 1 <= N and N + 1 traced steps");
  }
  if (!(alpha > 0.0 && alpha < 0.5)) throw Error(ErrorCode::Domain, "lyapunov_bound: alpha must lie in (0, 1/2)");
  if (!(tau > 0.0)) throw Error(ErrorCode::Domain, "lyapunov_bound: tau must be positive");

  const auto& cfg = trace.config;
  const auto& noise = cfg.noise;
  const auto& tol = cfg.link;
  LyapunovConstants c;
  {
    Eigen::LLT<Matrix> llt(cfg.P0), llt_bar(cfg.P0_bar);
    c.logdet_P0_inv = -2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    c.logdet_P0_bar_inv = -2.0 * llt_bar.matrixL().toDenseMatrix().diagonal().array().log().sum();
  }
  if (!(c.logdet_P0_inv > 1.0) || !(c.logdet_P0_bar_inv > 1.0)) {
    std::ostringstream os;
    os << "finite-sample bound needs log|P0^{-1}| > 1 and log|P0_bar^{-1}| > 1 (got " << c.logdet_P0_inv << ", "
       << c.logdet_P0_bar_inv << ")";
    throw Error(ErrorCode::Config, os.str());
  }

  std::optional<Vector> theta_p;
  if (plugin == Plugin::TrueTheta) theta_p = require_truth(trace);
  if (plugin == Plugin::Estimate) theta_p = trace.steps[N].theta_hat_next;

  // rho: Lipschitz constant of G' over the largest radius seen for each saturation in use.
  std::vector<std::pair<SaturationSpec, double>> radius_by_spec;
  for (std::size_t k = 0; k <= N; ++k) {
    const auto& s = trace.steps[k];
    auto it = std::find_if(radius_by_spec.begin(), radius_by_spec.end(),
                           [&](const auto& p) { return p.first == s.spec; });
    if (it == radius_by_spec.end()) {
      radius_by_spec.emplace_back(s.spec, s.gains.M);
    } else {
      it->second = std::max(it->second, s.gains.M);
    }
  }
  for (const auto& [spec, M] : radius_by_spec) {
    if (M > 0.0) c.rho = std::max(c.rho, g_bounds(M, spec, noise, tol, true).rho);
  }

  const double lam_exp = 2.0 + tau;
  c.lambda_N = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= N; ++k) {
    const auto& s = trace.steps[k];
    const auto& g = s.gains;
    double second = 0.0, fourth_dev = 0.0;
    if (theta_p) {
      const double x = s.phi.dot(*theta_p);
      second = sigma_var(x, s.spec, noise, tol);
      fourth_dev = central_moment4(x, s.spec, noise, tol) - second * second;
    } else {
      const double M = std::max(s.gains.M, 1e-12);
      auto var = [&](double x) { return sigma_var(x, s.spec, noise, tol); };
      auto dev = [&](double x) {
        const double v = sigma_var(x, s.spec, noise, tol);
        return central_moment4(x, s.spec, noise, tol) - v * v;
      };
      second = detail::grid_maximize(var, -M, M, tol.grid_divisions, tol.bounds).value;
      fourth_dev = detail::grid_maximize(dev, -M, M, std::max(16, tol.grid_divisions / 8), tol.bounds).value;
    }
    fourth_dev = std::max(0.0, fourth_dev);
    const double phi2 = s.phi.squaredNorm();
    const double inv_mu = 1.0 / g.mu;

    c.sigma_b = std::max(c.sigma_b, inv_mu * second);
    c.sigma_a = std::max(c.sigma_a, second);
    c.sigma_bar_b = std::max(c.sigma_bar_b, inv_mu * inv_mu * fourth_dev);
    c.sigma_bar_a = std::max(c.sigma_bar_a, fourth_dev);
    c.Phi = std::max(c.Phi, inv_mu * g.beta * g.beta * phi2);
    c.Phi_bar = std::max(c.Phi_bar, g.beta_bar * g.beta_bar * phi2);
    c.gamma = std::max(c.gamma, inv_mu * g.g_hi * g.g_hi / (g.a_bar * g.a_bar * g.beta_bar * g.beta_bar));
    c.Psi = std::max(c.Psi, 3.0 * inv_mu * c.rho * c.rho * phi2 / (2.0 * (g.a + g.a_bar) * g.beta_bar * g.beta_bar));
    c.delta0 = std::max(c.delta0, g.mu + g.beta * g.beta * s.phi_P_phi);
    const double first = s.lambda_min_P_bar_inv / std::pow(s.logdet_P_bar_inv_next, lam_exp);
    const double second_term =
        s.lambda_min_P_inv / std::pow(s.logdet_P_inv_next + s.logdet_P_bar_inv_next, lam_exp);
    c.lambda_N = std::min({c.lambda_N, first, second_term});
  }

  const Matrix P0_inv = cfg.P0.llt().solve(Matrix::Identity(cfg.P0.rows(), cfg.P0.cols()));
  const Matrix P0_bar_inv = cfg.P0_bar.llt().solve(Matrix::Identity(cfg.P0.rows(), cfg.P0.cols()));
  const auto& first_step = trace.steps.front();
  const double inv_mu0 = 1.0 / first_step.gains.mu;
  const double g_hi0 = first_step.gains.g_hi;
  if (theta_p) {
    const Vector e0 = *theta_p - cfg.theta0;
    const Vector e0_bar = *theta_p - cfg.theta0_bar;
    c.V0 = e0.dot(P0_inv * e0);
    c.V0_bar = e0_bar.dot(P0_bar_inv * e0_bar);
    const double proj = first_step.phi.dot(e0_bar);
    c.c0 = 1.5 * inv_mu0 * g_hi0 * g_hi0 * proj * proj;
  } else {
    c.V0 = sup_quadratic_over_domain(P0_inv, cfg.theta0, cfg.domain);
    c.V0_bar = sup_quadratic_over_domain(P0_bar_inv, cfg.theta0_bar, cfg.domain);
    const auto [lo, hi] = inner_range(first_step.phi, cfg.domain);
    const double at0 = first_step.phi.dot(cfg.theta0_bar);
    const double proj2 = std::max((lo - at0) * (lo - at0), (hi - at0) * (hi - at0));
    c.c0 = 1.5 * inv_mu0 * g_hi0 * g_hi0 * proj2;
  }

  const double odds = (1.0 - alpha) / alpha;
  c.Gamma = c.V0 + c.sigma_b * c.logdet_P0_inv + c.Phi * cfg.P0.trace() * c.sigma_bar_b / (2.0 * c.sigma_b) +
            18.0 * c.sigma_b * odds;
  c.Gamma_bar = c.V0_bar + c.sigma_a * c.logdet_P0_bar_inv +
                c.Phi_bar * cfg.P0_bar.trace() * c.sigma_bar_a / (2.0 * c.sigma_a) + 10.0 * c.sigma_a * odds;
  c.C = 4.0 * c.Psi * std::pow(c.sigma_a + c.Gamma_bar + 1.0, lam_exp) +
        2.0 * c.Psi *
            std::pow(c.sigma_b + 6.0 * c.gamma * c.sigma_a + c.Gamma + 6.0 * c.gamma * c.Gamma_bar + 1.0, lam_exp);

  c.logdet_P_inv_final = trace.steps[N].logdet_P_inv_next;
  const double core = c.sigma_b * c.logdet_P_inv_final + c.C / c.lambda_N + c.Gamma;
  const Vector& Pdiag = trace.steps[N].P_diag_next;
  for (Eigen::Index j = 0; j < Pdiag.size(); ++j) c.squared_error_bound.push_back(Pdiag(j) * (core + c.c0));
  c.regret_bound = 2.0 * c.delta0 * core;
  return c;
}

ConfidenceReport lyapunov_bound(const RunTrace& trace, std::size_t N, double alpha, double tau, Plugin plugin) {
  const LyapunovConstants c = lyapunov_constants(trace, N, alpha, tau, plugin);
  ConfidenceReport rep;
  rep.method = "lyapunov";
  rep.confidence = 1.0 - 2.0 * alpha;
  const Vector& centre = trace.steps[N].theta_hat_next;
  rep.center = to_std(centre);
  for (Eigen::Index j = 0; j < centre.size(); ++j) {
    const double half = std::sqrt(c.squared_error_bound[static_cast<std::size_t>(j)]);
    rep.lower.push_back(centre(j) - half);
    rep.upper.push_back(centre(j) + half);
  }
  rep.constants = {{"sigma_b", c.sigma_b},
                   {"sigma_a", c.sigma_a},
                   {"sigma_bar_b", c.sigma_bar_b},
                   {"sigma_bar_a", c.sigma_bar_a},
                   {"Phi", c.Phi},
                   {"Phi_bar", c.Phi_bar},
                   {"gamma", c.gamma},
                   {"Psi", c.Psi},
                   {"rho", c.rho},
                   {"lambda_N", c.lambda_N},
                   {"delta0", c.delta0},
                   {"c0", c.c0},
                   {"V0", c.V0},
                   {"V0_bar", c.V0_bar},
                   {"Gamma", c.Gamma},
                   {"Gamma_bar", c.Gamma_bar},
                   {"C", c.C},
                   {"logdet_P_inv_final", c.logdet_P_inv_final},
                   {"regret_bound", c.regret_bound},
                   {"alpha", alpha},
                   {"tau", tau},
                   {"N", static_cast<double>(N)}};
  rep.provenance["plugin"] = to_string(plugin);
  rep.provenance["config_hash"] = trace.config_hash;
  rep.provenance["seed"] = std::to_string(trace.seed);
  if (plugin == Plugin::Estimate) {
    rep.warnings.push_back("conditional moments evaluated at the final estimate, not the true parameter");
  }
  return rep;
}

}  // namespace tsqn
