#include <gtest/gtest.h>

#include "sslasso/rng.hpp"
#include "sslasso/solver.hpp"
#include "support/prox_oracle.hpp"

using namespace sslasso;

namespace {

PenalizedQuadraticProblem scalar_problem() {
  PenalizedQuadraticProblem prob;
  prob.gram = Matrix::Constant(1, 1, 1.0);
  prob.moment = Vector::Constant(1, 2.0);
  prob.lambda = 0.5;
  return prob;
}

PenalizedQuadraticProblem random_problem(Index p, std::uint64_t seed,
                                         Index rows = 0) {
  Rng rng(seed);
  if (rows == 0) rows = p + rng.below(2 * p) + 1;
  Matrix a(rows, p);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  PenalizedQuadraticProblem prob;
  prob.gram = a.transpose() * a / static_cast<double>(rows);
  prob.moment.resize(p);
  for (Index j = 0; j < p; ++j) prob.moment[j] = rng.normal();
  prob.lambda = rng.uniform(0.05, 1.0);
  return prob;
}

}  // namespace

TEST(Solve, ScalarSoftThresholdClosedForm) {
  const auto sol = solve(scalar_problem());
  ASSERT_TRUE(sol.converged);
  EXPECT_NEAR(sol.beta[0], 1.5, 1e-12);
  EXPECT_LE(sol.kkt_residual, 1e-8);
}

TEST(Solve, SeparableDiagonalCase) {
  PenalizedQuadraticProblem prob;
  prob.gram = Vector{{1.0, 2.0}}.asDiagonal();
  prob.moment = Vector{{1.0, 0.2}};
  prob.lambda = 0.5;
  const auto sol = solve(prob);
  ASSERT_TRUE(sol.converged);
  EXPECT_NEAR(sol.beta[0], 0.5, 1e-12);
  EXPECT_NEAR(sol.beta[1], 0.0, 1e-12);
}

TEST(Solve, DiagonalSoftThresholdIsExact) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Index p = 1 + rng.below(8);
    Vector diag(p), b(p);
    for (Index j = 0; j < p; ++j) {
      diag[j] = rng.uniform(0.2, 3.0);
      b[j] = rng.normal();
    }
    PenalizedQuadraticProblem prob;
    prob.gram = diag.asDiagonal();
    prob.moment = b;
    prob.lambda = rng.uniform(0.1, 1.0);
    const auto sol = solve(prob, 1e-12);
    ASSERT_TRUE(sol.converged);
    for (Index j = 0; j < p; ++j)
      EXPECT_NEAR(sol.beta[j], soft_threshold(b[j], prob.lambda) / diag[j],
                  1e-12);
  }
}

TEST(Solve, MatchesProximalGradientOracle) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto prob = random_problem(2 + seed % 12, seed);
    const auto sol = solve(prob, 1e-9);
    ASSERT_TRUE(sol.converged) << "seed " << seed;
    EXPECT_LE(sol.kkt_residual, 1e-9);
    const auto oracle =
        prox_oracle::minimize(prob.gram, prob.moment, prob.lambda, 1e-10);
    ASSERT_TRUE(oracle.converged) << "seed " << seed;
    EXPECT_NEAR(sol.objective, oracle.objective,
                1e-8 * std::max(1.0, std::abs(oracle.objective)));
  }
}

TEST(Solve, ObjectiveNeverAboveZeroAndMonotone) {
  const auto prob = random_problem(12, 77);
  const auto sol = solve(prob);
  ASSERT_TRUE(sol.converged);
  EXPECT_LE(sol.objective, 0.0);
  for (std::size_t k = 1; k < sol.objective_trace.size(); ++k)
    EXPECT_LE(sol.objective_trace[k], sol.objective_trace[k - 1] + 1e-12);
}

TEST(Solve, ScaleInvarianceOfTheSolutionSet) {
  const auto prob = random_problem(8, 31);
  PenalizedQuadraticProblem scaled;
  scaled.gram = 3.0 * prob.gram;
  scaled.moment = 3.0 * prob.moment;
  scaled.lambda = 3.0 * prob.lambda;
  const auto sol = solve(prob, 1e-10);
  const auto scaled_sol = solve(scaled, 1e-10);
  ASSERT_TRUE(sol.converged && scaled_sol.converged);
  EXPECT_NEAR(3.0 * sol.objective, scaled_sol.objective,
              1e-8 * std::max(1.0, std::abs(scaled_sol.objective)));
}

TEST(Solve, ZeroDiagonalPinnedOrUnbounded) {
  PenalizedQuadraticProblem prob;
  prob.gram = Matrix::Zero(2, 2);
  prob.gram(0, 0) = 1.0;
  prob.moment = Vector{{1.0, 0.3}};
  prob.lambda = 0.5;
  const auto sol = solve(prob);
  ASSERT_TRUE(sol.converged);
  EXPECT_NEAR(sol.beta[1], 0.0, 1e-15);

  prob.moment[1] = 0.7;  // now |b_j| > lambda on a zero row
  EXPECT_THROW(solve(prob), UnboundedProblem);
}

TEST(Solve, NonConvergenceReportsDiagnostics) {
  const auto prob = random_problem(10, 42);
  const auto sol = solve(prob, 1e-12, 1);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.sweeps, 1);
  EXPECT_GT(sol.kkt_residual, 0.0);
}

TEST(KktResidual, ClosedFormOptimumIsZero) {
  const auto prob = scalar_problem();
  EXPECT_NEAR(kkt_residual(prob, Vector::Constant(1, 1.5)), 0.0, 1e-15);
}

TEST(KktResidual, AtZeroEqualsPositivePartOfMomentMinusLambda) {
  const auto prob = random_problem(9, 12);
  const double expected =
      std::max((prob.moment.cwiseAbs().array() - prob.lambda).maxCoeff(), 0.0);
  EXPECT_NEAR(kkt_residual(prob, Vector::Zero(9)), expected, 1e-14);
}

TEST(KktResidual, SolverOutputMeetsRequestedTolerance) {
  const auto prob = random_problem(14, 8);
  const auto sol = solve(prob, 1e-9);
  ASSERT_TRUE(sol.converged);
  EXPECT_LE(kkt_residual(prob, sol.beta), 1e-9);
}

TEST(Objective, ZeroVectorGivesZero) {
  const auto prob = random_problem(6, 2);
  EXPECT_DOUBLE_EQ(objective(prob, Vector::Zero(6)), 0.0);
}

TEST(Objective, HandArithmeticScalarCase) {
  EXPECT_NEAR(objective(scalar_problem(), Vector::Constant(1, 1.5)), -2.25,
              1e-14);
}

TEST(Objective, HomogeneousUnderProblemScaling) {
  const auto prob = random_problem(5, 3);
  PenalizedQuadraticProblem scaled;
  scaled.gram = 3.0 * prob.gram;
  scaled.moment = 3.0 * prob.moment;
  scaled.lambda = 3.0 * prob.lambda;
  Rng rng(4);
  Vector beta(5);
  for (Index j = 0; j < 5; ++j) beta[j] = rng.normal();
  EXPECT_NEAR(objective(scaled, beta), 3.0 * objective(prob, beta), 1e-12);
}

TEST(FixedPointGap, ProbeEqualToSolutionGivesZero) {
  const auto prob = random_problem(7, 21);
  const auto sol = solve(prob, 1e-10);
  EXPECT_DOUBLE_EQ(fixed_point_gap(prob, sol.beta, sol.beta), 0.0);
}

// For the scalar closed-form instance the strengthened inequality is tight at
// probe zero: F(0) - F(beta_hat) = 2.25 exactly cancels the quadratic term.
TEST(FixedPointGap, ScalarInstanceIsTightAtZeroProbe) {
  const auto prob = scalar_problem();
  const Vector beta_hat = Vector::Constant(1, 1.5);
  EXPECT_NEAR(fixed_point_gap(prob, beta_hat, Vector::Zero(1)), 0.0, 1e-12);
  // ... and equals the plain optimality gap plus the quadratic term.
  EXPECT_NEAR(objective(prob, Vector::Zero(1)) - objective(prob, beta_hat),
              2.25, 1e-12);
}

TEST(FixedPointGap, NonnegativeOnRandomProbes) {
  const auto prob = random_problem(10, 55);
  const auto sol = solve(prob, 1e-10);
  ASSERT_TRUE(sol.converged);
  Rng rng(56);
  for (int k = 0; k < 100; ++k) {
    Vector probe(10);
    for (Index j = 0; j < 10; ++j) probe[j] = 2.0 * rng.normal();
    EXPECT_GE(fixed_point_gap(prob, sol.beta, probe), -1e-8);
  }
}

TEST(Solve, L1BudgetHoldsForMixtureGram) {
  // G = Gram(all), b = (1/n) X_lab' Y with |Y| <= B_Y implies
  // ||beta_hat||_1 <= B_Y^2 N / (2 n lambda).
  Rng rng(91);
  const Index n = 12, total = 40, p = 18;
  Matrix x(total, p);
  for (Index i = 0; i < total; ++i)
    for (Index j = 0; j < p; ++j)
      x(i, j) = static_cast<double>(rng.rademacher());
  Vector y(n);
  const double label_bound = 1.5;
  for (Index i = 0; i < n; ++i) y[i] = rng.uniform(-label_bound, label_bound);

  PenalizedQuadraticProblem prob;
  prob.gram = x.transpose() * x / static_cast<double>(total);
  prob.moment = x.topRows(n).transpose() * y / static_cast<double>(n);
  prob.lambda = 0.05;
  const auto sol = solve(prob, 1e-10);
  ASSERT_TRUE(sol.converged);
  const double budget = label_bound * label_bound * total / (2.0 * n * prob.lambda);
  EXPECT_LE(sol.beta.lpNorm<1>(), budget + 1e-8);
}
