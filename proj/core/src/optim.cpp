#include "semann/optim.hpp"

#include <cmath>
#include <limits>

#include "semann/errors.hpp"

namespace semann {

BfgsResult minimize_bfgs(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
    Eigen::VectorXd x0, const BfgsOptions& options) {
  const auto n = x0.size();
  constexpr double kArmijo = 1e-4;
  constexpr double kShrink = 0.5;
  constexpr double kMinStep = 1e-16;

  BfgsResult res;
  res.x = std::move(x0);
  res.f = objective(res.x);
  if (!std::isfinite(res.f))
    throw NumericError("minimize_bfgs: infeasible starting point");
  res.gradient = gradient(res.x);

  Eigen::MatrixXd h_inv;
  bool h_is_identity;
  if (options.initial_inverse_hessian &&
      options.initial_inverse_hessian->rows() == n) {
    h_inv = *options.initial_inverse_hessian;
    h_is_identity = false;
  } else {
    h_inv = Eigen::MatrixXd::Identity(n, n);
    h_is_identity = true;
  }

  for (res.iterations = 0; res.iterations < options.max_iterations;
       ++res.iterations) {
    const double gnorm = res.gradient.lpNorm<Eigen::Infinity>();
    if (gnorm < options.gradient_tol) {
      res.converged = true;
      res.stop_reason = "gradient below tolerance";
      return res;
    }

    Eigen::VectorXd direction = -(h_inv * res.gradient);
    double slope = direction.dot(res.gradient);
    if (!(slope < 0.0)) {
      // curvature information went bad; restart from steepest descent
      h_inv.setIdentity();
      h_is_identity = true;
      direction = -res.gradient;
      slope = direction.dot(res.gradient);
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    while (step > kMinStep) {
      x_new = res.x + step * direction;
      f_new = objective(x_new);
      if (std::isfinite(f_new) && f_new <= res.f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= kShrink;
    }
    if (!accepted) {
      if (!h_is_identity) {
        // retry once along the raw gradient before giving up
        h_inv.setIdentity();
        h_is_identity = true;
        continue;
      }
      // No descent possible to machine precision: the relative-change
      // criterion is met vacuously.
      res.converged = true;
      res.stop_reason = "line search exhausted (stationary to precision)";
      return res;
    }

    const Eigen::VectorXd g_new = gradient(x_new);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.gradient;
    const double sy = s.dot(y);

    const double f_change = std::fabs(res.f - f_new);
    const double f_scale = std::max(1.0, std::fabs(res.f));
    res.x = std::move(x_new);
    res.f = f_new;
    res.gradient = g_new;

    if (f_change <= options.relative_f_tol * f_scale) {
      res.converged = true;
      res.stop_reason = "relative objective change below tolerance";
      ++res.iterations;
      return res;
    }

    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (h_is_identity) {
        // scale the initial inverse Hessian (Nocedal & Wright eq. 6.20)
        h_inv *= sy / y.squaredNorm();
        h_is_identity = false;
      }
      const Eigen::VectorXd hy = h_inv * y;
      const double yhy = y.dot(hy);
      const double rho = 1.0 / sy;
      // BFGS inverse update, rank-two form
      h_inv += (sy + yhy) * rho * rho * (s * s.transpose());
      h_inv -= rho * (hy * s.transpose() + s * hy.transpose());
    }
  }

  res.stop_reason = "iteration cap reached";
  return res;
}

}  // namespace semann
