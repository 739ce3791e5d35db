#include "nrsfm/lm.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "nrsfm/error.hpp"

namespace nrsfm {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x) {
  Eigen::VectorXd r0;
  fn(x, r0, nullptr);
  Eigen::MatrixXd J(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  Eigen::VectorXd r;
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
  for (int k = 0; k < x.size(); ++k) {
    const double h = eps * std::max(1.0, std::abs(x(k)));
    xp(k) = x(k) + h;
    fn(xp, r, nullptr);
    J.col(k) = (r - r0) / h;
    xp(k) = x(k);
  }
  return J;
}

Eigen::MatrixXd central_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd r0;
  fn(x, r0, nullptr);
  Eigen::MatrixXd J(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  Eigen::VectorXd rp, rm;
  for (int k = 0; k < x.size(); ++k) {
    xp(k) = x(k) + h;
    fn(xp, rp, nullptr);
    xp(k) = x(k) - h;
    fn(xp, rm, nullptr);
    J.col(k) = (rp - rm) / (2.0 * h);
    xp(k) = x(k);
  }
  return J;
}

LmResult lm_minimize(const ResidualFn& fn, Eigen::VectorXd x0, const LmOptions& opts) {
  LmResult res;
  res.x = std::move(x0);

  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& rr, Eigen::MatrixXd& JJ) {
    if (opts.numeric_jacobian) {
      fn(x, rr, nullptr);
      JJ = numeric_jacobian(fn, x);
    } else {
      fn(x, rr, &JJ);
    }
  };
  evaluate(res.x, r, J);
  if (!r.allFinite()) throw InvalidArgument("non-finite residuals at the start point");

  double cost = 0.5 * r.squaredNorm();
  Eigen::VectorXd g = J.transpose() * r;
  Eigen::MatrixXd A = J.transpose() * J;
  double mu = opts.initial_damping * std::max(1.0, A.diagonal().maxCoeff());
  double nu = 2.0;
  int stalls = 0;

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    if (cost <= opts.cost_tol) {
      res.converged = true;
      res.message = "cost below tolerance";
      break;
    }
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
      res.converged = true;
      res.message = "gradient below tolerance";
      break;
    }
    Eigen::MatrixXd H = A;
    H.diagonal().array() += mu;
    const Eigen::VectorXd step = H.llt().solve(-g);
    if (step.norm() <= opts.step_tol * (res.x.norm() + opts.step_tol)) {
      res.converged = true;
      res.message = "step below tolerance";
      break;
    }
    const Eigen::VectorXd xn = res.x + step;
    Eigen::VectorXd rn;
    Eigen::MatrixXd Jn;
    fn(xn, rn, nullptr);
    const double cost_n = rn.allFinite() ? 0.5 * rn.squaredNorm() : std::numeric_limits<double>::infinity();
    const double predicted = 0.5 * step.dot(mu * step - g);
    const double rho = predicted > 0.0 ? (cost - cost_n) / predicted : -1.0;
    if (rho > 0.0) {
      const double rel = (cost - cost_n) / std::max(cost, std::numeric_limits<double>::min());
      stalls = rel < opts.stall_tol ? stalls + 1 : 0;
      res.x = xn;
      evaluate(res.x, r, J);
      cost = 0.5 * r.squaredNorm();
      g = J.transpose() * r;
      A = J.transpose() * J;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (stalls >= opts.stall_limit) {
        res.message = "stalled: relative decrease below tolerance";
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e300) {
        res.message = "damping overflow";
        break;
      }
    }
  }
  if (res.message.empty()) res.message = "iteration limit reached";
  res.cost = cost;
  res.grad_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  return res;
}

}  // namespace nrsfm
