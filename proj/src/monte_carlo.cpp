#include "tsqn/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "tsqn/error.hpp"

namespace tsqn {

void McDesign::validate() const {
  if (K < 2) throw Error(ErrorCode::Config, "monte carlo: K must be >= 2");
  estimator.validate();
  const auto m = estimator.dimension();
  for (std::size_t k = 0; k < regressors.size(); ++k) {
    if (regressors[k].size() != m || !regressors[k].allFinite()) {
      throw Error(ErrorCode::Data, "monte carlo: regressor " + std::to_string(k) + " has the wrong size or is not finite");
    }
  }
  if (specs.empty() || (specs.size() != 1 && specs.size() < regressors.size())) {
    throw Error(ErrorCode::Config, "monte carlo: need one saturation spec or one per step");
  }
}

Vector replicate_error(const McDesign& d, std::size_t i) {
  const std::uint64_t rep_seed = substream_seed(d.seed, i);
  Rng prior(substream_seed(rep_seed, 2));
  const Vector theta = sample_uniform(d.estimator.domain, prior);
  const auto records = gen_observations(d.regressors, theta, d.specs, d.estimator.noise, rep_seed);
  TsqnEstimator est(d.estimator);
  for (const auto& r : records) est.update(r);
  return theta - est.state().theta_hat;
}

Matrix replicate_errors(const McDesign& d) {
  d.validate();
  const auto m = d.estimator.dimension();
  Matrix out(static_cast<Eigen::Index>(d.K), m);
  unsigned workers = d.threads ? d.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, d.K));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < d.K; i = next++) {
      try {
        out.row(static_cast<Eigen::Index>(i)) = replicate_error(d, i).transpose();
      } catch (const Error& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::make_exception_ptr(
              Error(e.code(), "replication " + std::to_string(i) + ": " + e.what()));
        }
        next = d.K;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double empirical_quantile(std::vector<double> samples, double p) {
  if (samples.empty()) throw Error(ErrorCode::Domain, "empirical_quantile: no samples");
  std::sort(samples.begin(), samples.end());
  if (p <= 0.0) return samples.front();
  if (p >= 1.0) return samples.back();
  const auto K = static_cast<double>(samples.size());
  // smallest index i (1-based) with i / K >= p
  auto i = static_cast<std::size_t>(std::ceil(p * K));
  // guard against p * K landing just above an integer through rounding
  if (i > 1 && static_cast<double>(i - 1) / K >= p) --i;
  return samples[std::clamp<std::size_t>(i, 1, samples.size()) - 1];
}

double hoeffding_upsilon(std::size_t K, double t) {
  return std::sqrt((std::log(2.0) - std::log(t)) / (2.0 * static_cast<double>(K)));
}

ConfidenceReport mc_interval(const Matrix& errors, double alpha, double t, const Vector* theta_hat) {
  if (!(alpha > 0.0) || !(t > 0.0) || !(alpha + t < 1.0)) {
    throw Error(ErrorCode::Domain, "mc_interval: need alpha > 0, t > 0 and alpha + t < 1");
  }
  const auto K = static_cast<std::size_t>(errors.rows());
  if (K < 2) throw Error(ErrorCode::Domain, "mc_interval: need at least two replications");
  const auto m = errors.cols();
  if (theta_hat && theta_hat->size() != m) throw Error(ErrorCode::Domain, "mc_interval: estimate has the wrong size");

  const double ups = hoeffding_upsilon(K, t);
  const double p_lo = alpha / 2.0 - ups;
  const double p_hi = 1.0 - alpha / 2.0 + ups;
  ConfidenceReport rep;
  rep.method = "monte_carlo";
  rep.confidence = 1.0 - alpha - t;
  for (Eigen::Index j = 0; j < m; ++j) {
    std::vector<double> col(errors.col(j).data(), errors.col(j).data() + K);
    const double shift = theta_hat ? (*theta_hat)(j) : 0.0;
    rep.center.push_back(shift);
    rep.lower.push_back(shift + empirical_quantile(col, p_lo));
    rep.upper.push_back(shift + empirical_quantile(std::move(col), p_hi));
  }
  if (p_lo <= 0.0 || p_hi >= 1.0) {
    rep.warnings.push_back("corrected quantile level outside (0,1): interval spans the full sample range");
  }
  rep.constants = {{"alpha", alpha}, {"t", t}, {"K", static_cast<double>(K)}, {"upsilon", ups},
                   {"level_lower", p_lo}, {"level_upper", p_hi}};
  rep.provenance["target"] = theta_hat ? "theta" : "theta - theta_hat";
  return rep;
}

}  // namespace tsqn
