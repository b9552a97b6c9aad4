#include "tsqn/geometry.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>

#include "tsqn/error.hpp"

namespace tsqn {

DomainSet DomainSet::box(Vector lower, Vector upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw Error(ErrorCode::Config, "box domain needs lower and upper bounds of equal positive dimension");
  }
  if (!lower.allFinite() || !upper.allFinite()) throw Error(ErrorCode::Config, "box domain must be bounded");
  if (!(lower.array() < upper.array()).all()) {
    throw Error(ErrorCode::Config, "box domain needs lower < upper in every component");
  }
  return DomainSet(Box{std::move(lower), std::move(upper)});
}

DomainSet DomainSet::cube(Eigen::Index m, double half_width) {
  return box(Vector::Constant(m, -half_width), Vector::Constant(m, half_width));
}

DomainSet DomainSet::ball(Vector center, double radius) {
  if (center.size() == 0 || !center.allFinite()) throw Error(ErrorCode::Config, "ball domain needs a finite center");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw Error(ErrorCode::Config, "ball radius must be positive");
  return DomainSet(Ball{std::move(center), radius});
}

Eigen::Index DomainSet::dimension() const {
  if (const auto* b = as_box()) return b->lower.size();
  return std::get<Ball>(shape_).center.size();
}

bool DomainSet::contains(const Vector& x, double tol) const {
  if (x.size() != dimension()) return false;
  if (const auto* b = as_box()) {
    return ((x.array() >= b->lower.array() - tol) && (x.array() <= b->upper.array() + tol)).all();
  }
  const auto& ball = std::get<Ball>(shape_);
  return (x - ball.center).norm() <= ball.radius + tol;
}

bool DomainSet::interior(const Vector& x) const {
  if (x.size() != dimension()) return false;
  if (const auto* b = as_box()) return ((x.array() > b->lower.array()) && (x.array() < b->upper.array())).all();
  const auto& ball = std::get<Ball>(shape_);
  return (x - ball.center).norm() < ball.radius;
}

Vector DomainSet::center() const {
  if (const auto* b = as_box()) return 0.5 * (b->lower + b->upper);
  return std::get<Ball>(shape_).center;
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> checked_eigen(const Matrix& Q, const ProjectionOptions& opts) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Domain, "projection metric: eigen-decomposition failed");
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0.0) || !(lmin > opts.pd_ratio * lmax)) {
    std::ostringstream os;
    os << "projection metric is not positive definite (eigenvalues in [" << lmin << ", " << lmax << "])";
    throw Error(ErrorCode::Domain, os.str());
  }
  return es;
}

bool is_diagonal(const Matrix& Q) {
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      if (i != j && Q(i, j) != 0.0) return false;
    }
  }
  return true;
}

Vector clamp_to_box(const Vector& x, const Box& b) { return x.cwiseMax(b.lower).cwiseMin(b.upper); }

Vector project_ball(const Vector& x, const Ball& ball, const Eigen::SelfAdjointEigenSolver<Matrix>& es) {
  const Vector d = x - ball.center;
  const double dnorm = d.norm();
  const Vector& lam = es.eigenvalues();
  const Vector dt = es.eigenvectors().transpose() * d;
  const double r = ball.radius;

  // KKT: y - c = (Q + nu I)^{-1} Q (x - c) with ||y - c|| = r; the norm is decreasing in nu.
  auto radius_gap = [&](double nu) {
    return (lam.array() / (lam.array() + nu) * dt.array()).matrix().norm() - r;
  };
  const double hi = lam.maxCoeff() * dnorm / r;
  const double gap0 = radius_gap(0.0), gap_hi = radius_gap(hi);
  double nu = hi;
  if (gap0 <= 0.0) {
    // x is on the sphere up to rounding
    nu = 0.0;
  } else if (gap_hi < 0.0) {
    std::uintmax_t iters = 200;
    auto done = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(b)); };
    auto [a, b] = boost::math::tools::toms748_solve(radius_gap, 0.0, hi, gap0, gap_hi, done, iters);
    nu = 0.5 * (a + b);
  }
  Vector z = es.eigenvectors() * (lam.array() / (lam.array() + nu) * dt.array()).matrix();
  const double zn = z.norm();
  if (zn > r) z *= r / zn;
  return ball.center + z;
}

// Primal active-set method for min (y - x)^T Q (y - x) over the box; exact up to rounding.
Vector active_set_box(const Vector& x, const Matrix& Q, const Box& box, const ProjectionOptions& opts) {
  const Eigen::Index m = x.size();
  Vector y = clamp_to_box(x, box);
  // -1 held at the lower bound, +1 at the upper bound, 0 free
  std::vector<int> state(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    state[i] = y(i) == box.lower(i) ? -1 : (y(i) == box.upper(i) ? 1 : 0);
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff() * (x - y).cwiseAbs().maxCoeff());
  const double mult_tol = 1e-13 * scale;
  double worst = 0.0;
  // Coordinates whose release bounced straight back onto the same bound: their multiplier sign is rounding noise.
  std::vector<char> pinned(static_cast<std::size_t>(m), 0);
  Eigen::Index released = -1;
  int released_side = 0;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    std::vector<Eigen::Index> free, held;
    for (Eigen::Index i = 0; i < m; ++i) (state[i] == 0 ? free : held).push_back(i);
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      Matrix Qff(nf, nf);
      Vector rhs = Vector::Zero(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        for (Eigen::Index b = 0; b < nf; ++b) Qff(a, b) = Q(free[a], free[b]);
        for (Eigen::Index h : held) rhs(a) -= Q(free[a], h) * (y(h) - x(h));
      }
      const Vector target = Qff.ldlt().solve(rhs);
      double step = 1.0;
      Eigen::Index blocking = -1;
      int side = 0;
      for (Eigen::Index a = 0; a < nf; ++a) {
        const Eigen::Index i = free[a];
        const double d = x(i) + target(a) - y(i);
        if (d < 0.0 && y(i) + d < box.lower(i)) {
          const double t = (box.lower(i) - y(i)) / d;
          if (t < step) step = t, blocking = i, side = -1;
        } else if (d > 0.0 && y(i) + d > box.upper(i)) {
          const double t = (box.upper(i) - y(i)) / d;
          if (t < step) step = t, blocking = i, side = 1;
        }
      }
      for (Eigen::Index a = 0; a < nf; ++a) {
        const Eigen::Index i = free[a];
        y(i) = std::clamp(y(i) + step * (x(i) + target(a) - y(i)), box.lower(i), box.upper(i));
      }
      if (blocking >= 0) {
        if (blocking == released && side == released_side && step <= 1e-12) pinned[blocking] = 1;
        released = -1;
        state[blocking] = side;
        y(blocking) = side < 0 ? box.lower(blocking) : box.upper(blocking);
        continue;
      }
    }
    // Stationary on the current face; release the held coordinate with the most negative multiplier.
    const Vector g = Q * (y - x);
    Eigen::Index release = -1;
    worst = 0.0;
    for (Eigen::Index i : held) {
      if (box.lower(i) == box.upper(i) || pinned[i]) continue;
      const double violation = state[i] < 0 ? -g(i) : g(i);
      if (violation > mult_tol && violation > worst) worst = violation, release = i;
    }
    if (release < 0) return y;
    released = release;
    released_side = state[release];
    state[release] = 0;
  }
  std::ostringstream os;
  os << "box projection did not settle in " << opts.max_iterations << " active-set changes (multiplier gap " << worst
     << ")";
  throw NumericError(os.str(), worst);
}

}  // namespace

Vector q_project(const Vector& x, const Matrix& Q, const DomainSet& D, const ProjectionOptions& opts) {
  if (x.size() != D.dimension() || Q.rows() != x.size() || Q.cols() != x.size()) {
    throw Error(ErrorCode::Domain, "q_project: dimension mismatch");
  }
  if (!x.allFinite()) throw Error(ErrorCode::Domain, "q_project: point must be finite");
  const auto es = checked_eigen(Q, opts);
  if (D.contains(x, 0.0)) return x;
  if (const auto* ball = D.as_ball()) return project_ball(x, *ball, es);
  const auto& box = *D.as_box();
  if (is_diagonal(Q)) return clamp_to_box(x, box);
  return active_set_box(x, Q, box, opts);
}

Vector q_project(const Vector& x, const Matrix& Q, const Matrix& Q_inverse, const DomainSet& D,
                 const ProjectionOptions& opts) {
  if (x.size() != D.dimension() || Q.rows() != x.size() || Q_inverse.rows() != x.size()) {
    throw Error(ErrorCode::Domain, "q_project: dimension mismatch");
  }
  if (!x.allFinite()) throw Error(ErrorCode::Domain, "q_project: point must be finite");
  if (D.contains(x, 0.0)) return x;
  if (const auto* ball = D.as_ball()) return project_ball(x, *ball, checked_eigen(Q, opts));
  const auto& box = *D.as_box();
  if (is_diagonal(Q)) return clamp_to_box(x, box);
  if (!(Q_inverse.diagonal().array() > 0.0).all()) {
    throw Error(ErrorCode::Domain, "projection metric is not positive definite");
  }
  return active_set_box(x, Q, box, opts);
}

std::pair<double, double> inner_range(const Vector& phi, const DomainSet& D) {
  if (phi.size() != D.dimension()) throw Error(ErrorCode::Domain, "inner_range: dimension mismatch");
  if (const auto* b = D.as_box()) {
    const Eigen::ArrayXd lo = phi.array() * b->lower.array();
    const Eigen::ArrayXd hi = phi.array() * b->upper.array();
    return {lo.min(hi).sum(), lo.max(hi).sum()};
  }
  const auto& ball = *D.as_ball();
  const double mid = phi.dot(ball.center);
  const double spread = ball.radius * phi.norm();
  return {mid - spread, mid + spread};
}

double sup_abs_inner(const Vector& phi, const DomainSet& D) {
  const auto [lo, hi] = inner_range(phi, D);
  return std::max(std::abs(lo), std::abs(hi));
}

}  // namespace tsqn
