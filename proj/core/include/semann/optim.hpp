#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>

namespace semann {

struct BfgsOptions {
  int max_iterations = 2000;
  double gradient_tol = 1e-6;   // max-norm of the gradient
  double relative_f_tol = 1e-10;
  /// Seed for the inverse-Hessian approximation (must be symmetric positive
  /// definite). Warm restarts near a previous optimum converge in far fewer
  /// iterations with the previous curvature than from the identity.
  std::optional<Eigen::MatrixXd> initial_inverse_hessian;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Quasi-Newton (BFGS) minimization with a backtracking Armijo line search.
/// The objective may return +infinity to mark infeasible points; the line
/// search backs off until the trial point is feasible. The starting point
/// must be feasible.
BfgsResult minimize_bfgs(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
    Eigen::VectorXd x0, const BfgsOptions& options = {});

}  // namespace semann
