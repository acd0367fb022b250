#include <gtest/gtest.h>

#include "sslasso/estimators.hpp"
#include "sslasso/rng.hpp"
#include "support/prox_oracle.hpp"

using namespace sslasso;

namespace {

PartiallyLabeledDataset random_dataset(Index n, Index total, Index p,
                                       std::uint64_t seed) {
  Rng rng(seed);
  PartiallyLabeledDataset d;
  d.features.resize(total, p);
  d.labels.resize(n);
  for (Index i = 0; i < total; ++i)
    for (Index j = 0; j < p; ++j) d.features(i, j) = rng.normal();
  for (Index i = 0; i < n; ++i) d.labels[i] = rng.normal();
  return d;
}

Matrix random_psd(Index p, Index rank, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(rank, p);
  for (Index i = 0; i < rank; ++i)
    for (Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  return a.transpose() * a / static_cast<double>(rank);
}

}  // namespace

TEST(BuildProblem, SupervisedComposesGramAndMoment) {
  PartiallyLabeledDataset d;
  d.features.resize(2, 2);
  d.features << 1, 1, 1, -1;
  d.labels.resize(2);
  d.labels << 1.0, 0.5;
  const auto prob = build_problem(d, EstimatorVariant::supervised(), 0.3);
  EXPECT_LT((prob.gram - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((prob.moment - labeled_moment(d)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(prob.lambda, 0.3);
}

// The supervised problem is the residual-form lasso up to the constant
// (1/n)||Y||^2, so the two minimizers coincide.
TEST(BuildProblem, SupervisedMatchesResidualFormLasso) {
  const auto d = random_dataset(5, 5, 3, 30);
  const double lambda = 0.25;
  const auto prob = build_problem(d, EstimatorVariant::supervised(), lambda);
  const auto sol = solve(prob, 1e-11);
  ASSERT_TRUE(sol.converged);

  // Independent oracle on the residual form assembled from raw data.
  const Index n = d.labeled_count();
  const Matrix x = d.features.topRows(n);
  const Matrix raw_gram = x.transpose() * x / static_cast<double>(n);
  const Vector raw_moment = x.transpose() * d.labels / static_cast<double>(n);
  const auto oracle = prox_oracle::minimize(raw_gram, raw_moment, lambda, 1e-11);
  ASSERT_TRUE(oracle.converged);

  const double y_energy = d.labels.squaredNorm() / static_cast<double>(n);
  const double residual_objective =
      (d.labels - x * sol.beta).squaredNorm() / static_cast<double>(n) +
      2.0 * lambda * sol.beta.lpNorm<1>();
  EXPECT_NEAR(residual_objective, sol.objective + y_energy, 1e-10);
  EXPECT_NEAR(sol.objective, oracle.objective, 1e-8);
}

TEST(BuildProblem, VariantsPickTheDocumentedScope) {
  const auto d = random_dataset(4, 10, 3, 7);
  EXPECT_LT((build_problem(d, EstimatorVariant::transductive(), 1.0).gram -
             gram(d, SampleScope::unlabeled).matrix)
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_LT((build_problem(d, EstimatorVariant::semisupervised(), 1.0).gram -
             gram(d, SampleScope::all).matrix)
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  const Matrix sigma = Matrix::Identity(3, 3);
  const auto known = build_problem(d, EstimatorVariant::known_sigma(sigma), 1.0);
  EXPECT_LT((known.gram - sigma).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildProblem, OnlySupervisedAndKnownSigmaOnFullyLabeledData) {
  const auto d = random_dataset(4, 4, 3, 9);
  EXPECT_THROW(build_problem(d, EstimatorVariant::transductive(), 1.0),
               InvalidInput);
  EXPECT_THROW(build_problem(d, EstimatorVariant::transductive_projected(), 1.0),
               InvalidInput);
  EXPECT_THROW(build_problem(d, EstimatorVariant::alquier(), 1.0), InvalidInput);
  EXPECT_THROW(build_problem(d, EstimatorVariant::semisupervised(), 1.0),
               InvalidInput);
  EXPECT_NO_THROW(build_problem(d, EstimatorVariant::supervised(), 1.0));
  EXPECT_NO_THROW(build_problem(
      d, EstimatorVariant::known_sigma(Matrix::Identity(3, 3)), 1.0));
}

TEST(BuildProblem, KnownSigmaDimensionMismatchIsRejected) {
  const auto d = random_dataset(4, 8, 3, 11);
  EXPECT_THROW(
      build_problem(d, EstimatorVariant::known_sigma(Matrix::Identity(2, 2)),
                    1.0),
      InvalidInput);
}

// With identical labeled and unlabeled gram matrices (and full rank), the
// alquier reweighting is the identity.
TEST(BuildProblem, AlquierReducesToPlainMomentWhenGramsAgree) {
  auto d = random_dataset(4, 8, 3, 13);
  d.features.bottomRows(4) = d.features.topRows(4);  // unlabeled = labeled
  const auto plain = build_problem(d, EstimatorVariant::transductive(), 1.0);
  const auto alq = build_problem(d, EstimatorVariant::alquier(), 1.0);
  EXPECT_LT((plain.moment - alq.moment).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((plain.gram - alq.gram).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildProblem, AlquierMomentLiesInUnlabeledRange) {
  const auto d = random_dataset(6, 9, 5, 17);  // 3 unlabeled rows in R^5
  const auto alq = build_problem(d, EstimatorVariant::alquier(), 1.0);
  const Matrix projector = range_projector(alq.gram);
  EXPECT_LT((projector * alq.moment - alq.moment).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BuildProblem, ProjectionIsNoOpOnFullRankUnlabeledGram) {
  const auto d = random_dataset(3, 12, 4, 19);  // 9 unlabeled rows, full rank
  const auto plain = build_problem(d, EstimatorVariant::transductive(), 0.7);
  const auto projected =
      build_problem(d, EstimatorVariant::transductive_projected(), 0.7);
  EXPECT_LT((plain.moment - projected.moment).cwiseAbs().maxCoeff(), 1e-10);
  const auto sol_plain = solve(plain, 1e-10);
  const auto sol_projected = solve(projected, 1e-10);
  EXPECT_NEAR(sol_plain.objective, sol_projected.objective, 1e-9);
}

TEST(PseudoInverse, DiagonalAndIdentityCases) {
  Matrix m = Vector{{2.0, 0.0}}.asDiagonal();
  const Matrix inv = pseudo_inverse(m);
  EXPECT_NEAR(inv(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(inv(1, 1), 0.0, 1e-14);
  EXPECT_LT((pseudo_inverse(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(PseudoInverse, PenroseIdentitiesOnRankDeficientMatrix) {
  const Matrix m = random_psd(4, 2, 23);
  const Matrix inv = pseudo_inverse(m);
  const double scale = m.cwiseAbs().maxCoeff();
  EXPECT_LT((m * inv * m - m).cwiseAbs().maxCoeff(), 1e-8 * scale);
  EXPECT_LT((inv * m * inv - inv).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((m * inv - (m * inv).transpose()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((inv * m - (inv * m).transpose()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(PseudoInverse, NonSymmetricInputIsRejected) {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(pseudo_inverse(m), InvalidInput);
}

TEST(RangeProjector, DiagonalAndFullRankCases) {
  Matrix m = Vector{{2.0, 0.0}}.asDiagonal();
  const Matrix pi = range_projector(m);
  EXPECT_NEAR(pi(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(pi(1, 1), 0.0, 1e-14);
  const Matrix full = random_psd(3, 6, 29);
  EXPECT_LT((range_projector(full) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(RangeProjector, ProjectsOntoSampleSpan) {
  const auto d = random_dataset(6, 9, 5, 31);  // 3 unlabeled points in R^5
  const Matrix unlab = gram(d, SampleScope::unlabeled).matrix;
  const Matrix pi = range_projector(unlab);
  EXPECT_NEAR(pi.trace(), 3.0, 1e-9);  // rank of 3 generic points
  EXPECT_LT((pi * unlab - unlab).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((pi * pi - pi).cwiseAbs().maxCoeff(), 1e-8);
  Eigen::SelfAdjointEigenSolver<Matrix> es(pi, Eigen::EigenvaluesOnly);
  for (Index i = 0; i < 5; ++i) {
    const double ev = es.eigenvalues()[i];
    EXPECT_LT(std::min(std::abs(ev), std::abs(ev - 1.0)), 1e-8);
  }
}
