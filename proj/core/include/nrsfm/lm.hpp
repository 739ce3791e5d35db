#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace nrsfm {

/// Evaluates residuals r(x) and, when J is non-null, the Jacobian dr/dx.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J)>;

struct LmOptions {
  int max_iter = 500;
  double grad_tol = 1e-14;      // infinity norm of J^T r
  double step_tol = 1e-15;      // relative step size
  double cost_tol = 1e-30;      // absolute cost 0.5 |r|^2
  double stall_tol = 1e-12;     // relative decrease counted as progress
  int stall_limit = 8;
  double initial_damping = 1e-3;
  bool numeric_jacobian = false;  // ignore the analytic Jacobian
};

struct LmResult {
  Eigen::VectorXd x;
  double cost = 0.0;       // 0.5 |r|^2
  double grad_norm = 0.0;  // |J^T r|_inf
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Levenberg-Marquardt with Nielsen damping updates. Works for any ratio of
/// residuals to parameters (the damped normal equations stay definite).
/// Throws InvalidArgument on non-finite residuals at the start point.
LmResult lm_minimize(const ResidualFn& fn, Eigen::VectorXd x0, const LmOptions& opts = {});

/// Forward-difference Jacobian with step sqrt(eps) * max(1, |x_k|).
Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x);
/// Central-difference Jacobian, used to validate analytic derivatives.
Eigen::MatrixXd central_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, double h = 1e-6);

}  // namespace nrsfm
