#pragma once

// Test-only proximal-gradient (accelerated ISTA) minimizer of
//   F(beta) = beta'G beta - 2 b'beta + 2 lambda ||beta||_1.
// Kept independent of the library's coordinate-descent path: it re-implements
// the objective, gradient, soft-thresholding and optimality measure from
// scratch so it can serve as an oracle for the solver.

#include <Eigen/Dense>

#include <cmath>

namespace prox_oracle {

struct Result {
  Eigen::VectorXd beta;
  double objective = 0.0;
  double kkt_residual = 0.0;
  long iterations = 0;
  bool converged = false;
};

inline double objective_value(const Eigen::MatrixXd& gram,
                              const Eigen::VectorXd& moment, double lambda,
                              const Eigen::VectorXd& beta) {
  return beta.dot(gram * beta) - 2.0 * moment.dot(beta) +
         2.0 * lambda * beta.lpNorm<1>();
}

inline double optimality_gap(const Eigen::MatrixXd& gram,
                             const Eigen::VectorXd& moment, double lambda,
                             const Eigen::VectorXd& beta) {
  const Eigen::VectorXd g = gram * beta - moment;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta[j] == 0.0
                         ? std::max(std::abs(g[j]) - lambda, 0.0)
                         : std::abs(g[j] + lambda * (beta[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

inline Result minimize(const Eigen::MatrixXd& gram,
                       const Eigen::VectorXd& moment, double lambda,
                       double tol = 1e-10, long max_iterations = 400000) {
  const Eigen::Index p = moment.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                    Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(2.0 * es.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;
  const double shrink = lambda * 2.0 * step;  // prox of 2 lambda |.| at step

  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd y = x;
  double t = 1.0;

  Result out;
  for (long it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd grad = 2.0 * (gram * y - moment);
    Eigen::VectorXd x_new = y - step * grad;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double v = x_new[j];
      x_new[j] = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
    }
    const Eigen::VectorXd dx = x_new - x;
    if (grad.dot(dx) > 0) {  // adaptive restart
      t = 1.0;
      y = x_new;
    } else {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + ((t - 1.0) / t_new) * dx;
      t = t_new;
    }
    x = x_new;
    if (it % 16 == 0 || it == max_iterations) {
      const double gap = optimality_gap(gram, moment, lambda, x);
      if (gap <= tol) {
        out.converged = true;
        out.iterations = it;
        break;
      }
      out.iterations = it;
    }
  }
  out.beta = x;
  out.objective = objective_value(gram, moment, lambda, x);
  out.kkt_residual = optimality_gap(gram, moment, lambda, x);
  return out;
}

}  // namespace prox_oracle
