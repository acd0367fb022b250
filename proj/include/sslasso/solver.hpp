#pragma once

#include <cmath>
#include <vector>

#include "sslasso/common.hpp"

namespace sslasso {

// minimize F(beta) = beta'G beta - 2 b'beta + 2 lambda ||beta||_1
// with G symmetric PSD. Every estimator variant reduces to this problem;
// G enters only through the quadratic form, so no square root of G is
// ever needed.
struct PenalizedQuadraticProblem {
  Matrix gram;    // G, p x p symmetric PSD
  Vector moment;  // b
  double lambda = 0.0;

  Index dimension() const { return moment.size(); }

  void validate() const {
    if (gram.rows() != gram.cols() || gram.rows() != moment.size())
      throw InvalidInput("problem: G must be p x p and b length p");
    if (!(lambda > 0.0)) throw InvalidInput("problem: lambda must be > 0");
    check_symmetric(gram, "problem");
  }
};

struct Solution {
  Vector beta;
  double kkt_residual = 0.0;
  double objective = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // one entry per completed sweep
};

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

inline double objective(const PenalizedQuadraticProblem& prob,
                        const Vector& beta) {
  return beta.dot(prob.gram * beta) - 2.0 * prob.moment.dot(beta) +
         2.0 * prob.lambda * beta.lpNorm<1>();
}

// Max violation of the subgradient optimality conditions; zero exactly at a
// global minimizer. With g = G beta - b:
//   beta_j = 0:  max(|g_j| - lambda, 0)
//   beta_j != 0: |g_j + lambda sign(beta_j)|
inline double kkt_residual(const PenalizedQuadraticProblem& prob,
                           const Vector& beta) {
  const Vector g = prob.gram * beta - prob.moment;
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    double v;
    if (beta[j] == 0.0) {
      v = std::max(std::abs(g[j]) - prob.lambda, 0.0);
    } else {
      v = std::abs(g[j] + prob.lambda * (beta[j] > 0 ? 1.0 : -1.0));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace detail {

inline double objective_from_gradient(const PenalizedQuadraticProblem& prob,
                                      const Vector& beta, const Vector& g) {
  // g = G beta - b  =>  beta'G beta = beta'(g + b)
  return beta.dot(g) - prob.moment.dot(beta) +
         2.0 * prob.lambda * beta.lpNorm<1>();
}

}  // namespace detail

// Cyclic coordinate descent with exact coordinate minimizers and KKT-based
// termination. Starts from zero, so the objective never exceeds F(0) = 0 and
// is non-increasing sweep to sweep.
inline Solution solve(const PenalizedQuadraticProblem& prob, double tol = 1e-8,
                      int max_sweeps = 100000) {
  prob.validate();
  if (!(tol > 0)) throw InvalidInput("solve: tol must be > 0");
  const Index p = prob.dimension();

  // A PSD matrix with G_jj = 0 has a zero j-th row, so coordinate j only
  // contributes -2 b_j beta_j + 2 lambda |beta_j|: bounded iff |b_j| <= lambda.
  for (Index j = 0; j < p; ++j) {
    if (prob.gram(j, j) == 0.0 && std::abs(prob.moment[j]) > prob.lambda)
      throw UnboundedProblem("solve: G_jj = 0 with |b_j| > lambda at j = " +
                             std::to_string(j));
  }

  Solution sol;
  sol.beta = Vector::Zero(p);
  Vector g = -prob.moment;  // g = G beta - b
  const int refresh_period = 256;

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (Index j = 0; j < p; ++j) {
      const double gjj = prob.gram(j, j);
      if (gjj == 0.0) continue;  // pinned at zero, optimal by subgradient
      const double partial = gjj * sol.beta[j] - g[j];
      const double updated = soft_threshold(partial, prob.lambda) / gjj;
      const double delta = updated - sol.beta[j];
      if (delta != 0.0) {
        g += prob.gram.col(j) * delta;
        sol.beta[j] = updated;
      }
    }
    sol.sweeps = sweep;
    sol.objective_trace.push_back(
        detail::objective_from_gradient(prob, sol.beta, g));

    double worst = 0.0;
    for (Index j = 0; j < p; ++j) {
      double v;
      if (sol.beta[j] == 0.0) {
        v = std::max(std::abs(g[j]) - prob.lambda, 0.0);
      } else {
        v = std::abs(g[j] + prob.lambda * (sol.beta[j] > 0 ? 1.0 : -1.0));
      }
      worst = std::max(worst, v);
    }
    if (worst <= tol) {
      // Certify against a freshly computed gradient: the incremental g can
      // drift after many sweeps.
      g = prob.gram * sol.beta - prob.moment;
      sol.kkt_residual = kkt_residual(prob, sol.beta);
      if (sol.kkt_residual <= tol) {
        sol.converged = true;
        sol.objective = objective(prob, sol.beta);
        return sol;
      }
    } else if (sweep % refresh_period == 0) {
      g = prob.gram * sol.beta - prob.moment;
    }
  }

  sol.kkt_residual = kkt_residual(prob, sol.beta);
  sol.objective = objective(prob, sol.beta);
  sol.converged = false;
  return sol;
}

// Slack in the fixed-point inequality satisfied by any exact minimizer
// beta_hat of F: for every probe beta,
//   beta_hat'G beta_hat <= beta'G beta + 2 b'(beta_hat - beta)
//     + 2 lambda (||beta||_1 - ||beta_hat||_1) - (beta_hat - beta)'G (beta_hat - beta).
// Returns RHS - LHS; nonnegative (up to solver tolerance) when beta_hat is
// the solver output, and zero when probe == beta_hat.
inline double fixed_point_gap(const PenalizedQuadraticProblem& prob,
                              const Vector& beta_hat, const Vector& probe) {
  const Vector diff = beta_hat - probe;
  const double rhs = probe.dot(prob.gram * probe) +
                     2.0 * prob.moment.dot(diff) +
                     2.0 * prob.lambda * probe.lpNorm<1>() -
                     2.0 * prob.lambda * beta_hat.lpNorm<1>() -
                     diff.dot(prob.gram * diff);
  const double lhs = beta_hat.dot(prob.gram * beta_hat);
  return rhs - lhs;
}

}  // namespace sslasso
