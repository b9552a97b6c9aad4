#pragma once

#include <Eigen/Dense>

#include <variant>

namespace tsqn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Box {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

/// Convex compact parameter set: an axis-aligned box or a Euclidean ball.
class DomainSet {
 public:
  static DomainSet box(Vector lower, Vector upper);
  /// Symmetric box [-half_width, half_width]^m.
  static DomainSet cube(Eigen::Index m, double half_width);
  static DomainSet ball(Vector center, double radius);

  Eigen::Index dimension() const;
  bool is_box() const { return std::holds_alternative<Box>(shape_); }
  const Box* as_box() const { return std::get_if<Box>(&shape_); }
  const Ball* as_ball() const { return std::get_if<Ball>(&shape_); }

  /// Membership with absolute slack `tol`.
  bool contains(const Vector& x, double tol = 1e-12) const;
  /// Strict interior test used for the true parameter (Assumption on interiority).
  bool interior(const Vector& x) const;
  Vector center() const;

 private:
  explicit DomainSet(std::variant<Box, Ball> shape) : shape_(std::move(shape)) {}
  std::variant<Box, Ball> shape_;
};

struct ProjectionOptions {
  int max_iterations = 10000;  ///< cap on active-set changes of the box solver
  double pd_ratio = 1e-12;   ///< Q is accepted when lambda_min > pd_ratio * lambda_max
};

/// argmin over y in D of (x - y)^T Q (x - y).
/// Box with diagonal Q: componentwise clamp. Ball: exact multiplier solve in Q's eigenbasis.
/// Box with general Q: primal active-set solve of the box-constrained quadratic program.
/// Throws Error(Domain) for a non positive-definite Q, NumericError when the active set does not settle.
Vector q_project(const Vector& x, const Matrix& Q, const DomainSet& D, const ProjectionOptions& opts = {});

/// Same as above with Q^{-1} already available (the estimator keeps both).
Vector q_project(const Vector& x, const Matrix& Q, const Matrix& Q_inverse, const DomainSet& D,
                 const ProjectionOptions& opts = {});

/// sup over x in D of |phi^T x|.
double sup_abs_inner(const Vector& phi, const DomainSet& D);

/// Range [min, max] of phi^T x over D.
std::pair<double, double> inner_range(const Vector& phi, const DomainSet& D);

}  // namespace tsqn
