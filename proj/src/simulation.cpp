#include "tsqn/simulation.hpp"

#include <cmath>
#include <sstream>

#include "tsqn/error.hpp"

namespace tsqn {

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(seed) ^ index);
}

double sample_noise(const NoiseModel& noise, Rng& rng) {
  if (const auto* g = noise.as_gaussian()) {
    std::normal_distribution<double> nd(0.0, std::sqrt(g->variance));
    return nd(rng);
  }
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  double q = ud(rng);
  while (q <= 0.0) q = ud(rng);
  return noise.quantile(q);
}

Vector sample_uniform(const DomainSet& D, Rng& rng) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  if (const auto* box = D.as_box()) {
    Vector x(box->lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = box->lower(i) + ud(rng) * (box->upper(i) - box->lower(i));
    return x;
  }
  const auto& ball = *D.as_ball();
  const auto m = ball.center.size();
  std::normal_distribution<double> nd;
  Vector dir(m);
  do {
    for (Eigen::Index i = 0; i < m; ++i) dir(i) = nd(rng);
  } while (dir.norm() == 0.0);
  const double r = ball.radius * std::pow(ud(rng), 1.0 / static_cast<double>(m));
  return ball.center + (r / dir.norm()) * dir;
}

const SaturationSpec& spec_at(const SpecSchedule& schedule, std::size_t k) {
  if (schedule.empty()) throw Error(ErrorCode::Config, "empty saturation schedule");
  if (schedule.size() == 1) return schedule.front();
  if (k >= schedule.size()) {
    throw Error(ErrorCode::Config, "saturation schedule shorter than the run (step " + std::to_string(k) + ")");
  }
  return schedule[k];
}

void ScenarioConfig::validate() const {
  const auto m = A.rows();
  if (m < 1 || A.cols() != m) throw Error(ErrorCode::Config, "scenario: A must be a nonempty square matrix");
  if (!A.allFinite()) throw Error(ErrorCode::Config, "scenario: A must be finite");
  Eigen::EigenSolver<Matrix> es(A, false);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0)) {
    std::ostringstream os;
    os << "scenario: spectral radius of A is " << radius << ", must be < 1 for bounded regressors";
    throw Error(ErrorCode::Config, os.str());
  }
  if (theta_true.size() != m) throw Error(ErrorCode::Config, "scenario: theta_true must have the dimension of A");
  if (!(input_scale >= 0.0) || !std::isfinite(input_scale)) {
    throw Error(ErrorCode::Config, "scenario: input_scale must be finite and nonnegative");
  }
  if (specs.empty() || (specs.size() != 1 && specs.size() < n)) {
    throw Error(ErrorCode::Config, "scenario: need one saturation spec or one per step");
  }
  for (const auto& s : specs) {
    if (auto why = describe_violation(s); !why.empty()) throw Error(ErrorCode::Config, "scenario: " + why);
  }
}

ScenarioConfig ScenarioConfig::reference(std::uint64_t seed, std::size_t n) {
  ScenarioConfig s;
  Vector diag(10);
  diag << 0.3, 0.5, 0.1, 0.01, 0.9, 0.95, 0.5, 0.4, 0.6, 0.1;
  s.A = diag.asDiagonal();
  s.theta_true.resize(10);
  s.theta_true << -1.2, 0.5, 1.0, -0.5, 1.5, -1.0, 1.8, 0.8, -1.8, 0.4;
  s.noise = NoiseModel::gaussian(1.0);
  s.n = n;
  s.seed = seed;
  return s;
}

DomainSet reference_domain() { return DomainSet::cube(10, 2.0); }

std::vector<Vector> gen_regressors(const ScenarioConfig& sc) {
  sc.validate();
  const auto m = sc.dimension();
  Rng rng(substream_seed(sc.seed, 0));
  std::normal_distribution<double> nd;
  std::vector<Vector> out;
  out.reserve(sc.n);
  Vector phi = Vector::Zero(m);
  Vector u(m);
  for (std::size_t k = 0; k < sc.n; ++k) {
    out.push_back(phi);
    const double scale = k == 0 ? sc.input_scale : sc.input_scale / std::pow(static_cast<double>(k), 0.25);
    u(0) = nd(rng);
    for (Eigen::Index i = 1; i < m; ++i) u(i) = scale * nd(rng);
    phi = sc.A * phi + u;
  }
  return out;
}

std::vector<ObservationRecord> gen_observations(const std::vector<Vector>& regressors, const Vector& theta,
                                                const SpecSchedule& specs, const NoiseModel& noise,
                                                std::uint64_t seed) {
  Rng rng(substream_seed(seed, 1));
  std::vector<ObservationRecord> out;
  out.reserve(regressors.size());
  for (std::size_t k = 0; k < regressors.size(); ++k) {
    const auto& spec = spec_at(specs, k);
    const double e = sample_noise(noise, rng);
    out.push_back({regressors[k], spec, saturate(regressors[k].dot(theta) + e, spec)});
  }
  return out;
}

RunTrace run_experiment(const ScenarioConfig& sc, const EstimatorConfig& config) {
  sc.validate();
  if (sc.dimension() != config.dimension()) {
    throw Error(ErrorCode::Config, "scenario and estimator dimensions differ");
  }
  if (!config.domain.interior(sc.theta_true)) {
    throw Error(ErrorCode::Config, "scenario: theta_true must be interior to the parameter domain");
  }
  const auto records = gen_observations(gen_regressors(sc), sc.theta_true, sc.specs, sc.noise, sc.seed);
  RunTrace trace = trace_run(config, records, sc.theta_true);
  trace.seed = sc.seed;
  return trace;
}

ExperimentCurves experiment_curves(const RunTrace& trace) {
  const Vector& theta = trace.truth ? *trace.truth : throw Error(ErrorCode::Mode, "curves need the true parameter");
  ExperimentCurves c;
  double sum_bar = 0.0, sum_hat = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& s = trace.steps[k];
    c.error_bar.push_back((s.theta_bar_next - theta).norm());
    c.error_hat.push_back((s.theta_hat_next - theta).norm());
    sum_bar += regret(trace, k, Layer::Preliminary);
    sum_hat += regret(trace, k, Layer::Accelerated);
    c.avg_regret_bar.push_back(sum_bar / static_cast<double>(k + 1));
    c.avg_regret_hat.push_back(sum_hat / static_cast<double>(k + 1));
  }
  return c;
}

}  // namespace tsqn
