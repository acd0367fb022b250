#include <gtest/gtest.h>

#include <sstream>

#include "sslasso/dataset.hpp"
#include "sslasso/rng.hpp"

using namespace sslasso;

namespace {

PartiallyLabeledDataset from_csv(const std::string& text) {
  std::istringstream in(text);
  return load_dataset(in);
}

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

}  // namespace

TEST(LoadDataset, TrailingEmptyLabelMakesUnlabeledRow) {
  const auto d = from_csv("x1,x2,y\n1,2,0.5\n3,4,1.5\n5,6,\n");
  EXPECT_EQ(d.labeled_count(), 2);
  EXPECT_EQ(d.total_count(), 3);
  EXPECT_EQ(d.unlabeled_count(), 1);
  EXPECT_DOUBLE_EQ(d.features(2, 1), 6.0);
  EXPECT_DOUBLE_EQ(d.labels[1], 1.5);
}

TEST(LoadDataset, MalformedFieldNamesRowAndColumn) {
  try {
    from_csv("x1,x2,y\n1.0,abc,0.5\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos);
  }
}

TEST(LoadDataset, FullyLabeledCorner) {
  const auto d = from_csv("x1,y\n1,1\n2,2\n");
  EXPECT_EQ(d.labeled_count(), 2);
  EXPECT_EQ(d.unlabeled_count(), 0);
}

TEST(LoadDataset, LabeledAfterUnlabeledIsRejected) {
  EXPECT_THROW(from_csv("x1,y\n1,\n2,3\n"), ParseError);
}

TEST(LoadDataset, AllRowsUnlabeledIsRejected) {
  EXPECT_THROW(from_csv("x1,y\n1,\n2,\n"), ParseError);
}

TEST(LoadDataset, InconsistentColumnCountIsRejected) {
  EXPECT_THROW(from_csv("x1,x2,y\n1,2,3\n1,2\n"), ParseError);
}

TEST(LoadDataset, HeaderMustMatch) {
  EXPECT_THROW(from_csv("a,b,y\n1,2,3\n"), ParseError);
  EXPECT_THROW(from_csv("x1,x2\n1,2\n"), ParseError);
}

TEST(CenterScale, HandComputedColumn) {
  const auto d = from_csv("x1,y\n1,0.5\n3,1.5\n");
  const auto result = center_scale(d);
  EXPECT_NEAR(result.data.features(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(result.data.features(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(result.transform.feature_offset[0], 2.0, 1e-15);
  EXPECT_NEAR(result.transform.feature_scale[0], 1.0, 1e-15);
  // Labels centered, never scaled.
  EXPECT_NEAR(result.data.labels[0], -0.5, 1e-15);
  EXPECT_NEAR(result.data.labels[1], 0.5, 1e-15);
  EXPECT_FALSE(result.transform.labels_scaled);
}

TEST(CenterScale, IdempotentWithinTolerance) {
  const auto d = random_dataset(6, 10, 3, 17);
  const auto once = center_scale(d);
  const auto twice = center_scale(once.data);
  EXPECT_LT((once.data.features - twice.data.features).cwiseAbs().maxCoeff(),
            1e-10);
  EXPECT_LT((once.data.labels - twice.data.labels).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(CenterScale, NormalizedColumnsHaveExpectedMoments) {
  const auto d = random_dataset(5, 12, 4, 3);
  const auto result = center_scale(d);
  for (Index j = 0; j < 4; ++j) {
    EXPECT_NEAR(result.data.features.col(j).mean(), 0.0, 1e-12);
    EXPECT_NEAR(result.data.features.col(j).squaredNorm() / 12.0, 1.0, 1e-12);
  }
}

TEST(CenterScale, ConstantColumnIsRejectedByName) {
  const auto d = from_csv("x1,x2,y\n5,1,0.5\n5,2,1.5\n");
  try {
    center_scale(d);
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("x1"), std::string::npos);
  }
}

TEST(Gram, OrthogonalSignRows) {
  PartiallyLabeledDataset d;
  d.features.resize(2, 2);
  d.features << 1, 1, 1, -1;
  d.labels.resize(2);
  d.labels << 0, 0;
  const auto g = gram(d, SampleScope::labeled);
  EXPECT_LT((g.matrix - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  g.validate();
}

TEST(Gram, RankOneRow) {
  PartiallyLabeledDataset d;
  d.features.resize(1, 2);
  d.features << 2, 0;
  d.labels.resize(1);
  d.labels << 1;
  const auto g = gram(d, SampleScope::all);
  Matrix expected(2, 2);
  expected << 4, 0, 0, 0;
  EXPECT_LT((g.matrix - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gram, MixtureIdentityAndPsdOrder) {
  const auto d = random_dataset(4, 10, 4, 99);
  const Matrix lab = gram(d, SampleScope::labeled).matrix;
  const Matrix unlab = gram(d, SampleScope::unlabeled).matrix;
  const Matrix all = gram(d, SampleScope::all).matrix;
  const Matrix mixture = (4.0 * lab + 6.0 * unlab) / 10.0;
  const double scale = all.cwiseAbs().maxCoeff();
  EXPECT_LT((mixture - all).cwiseAbs().maxCoeff(), 1e-12 * scale);

  // N * Gram(all) - n * Gram(labeled) is positive semidefinite.
  Eigen::SelfAdjointEigenSolver<Matrix> es(10.0 * all - 4.0 * lab,
                                           Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * scale);
}

TEST(Gram, PermutationInvariantWithinScope) {
  auto d = random_dataset(3, 8, 3, 7);
  const Matrix before = gram(d, SampleScope::unlabeled).matrix;
  d.features.row(4).swap(d.features.row(6));
  const Matrix after = gram(d, SampleScope::unlabeled).matrix;
  EXPECT_LT((before - after).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gram, EmptyUnlabeledScopeIsRejected) {
  const auto d = from_csv("x1,y\n1,1\n");
  EXPECT_THROW(gram(d, SampleScope::unlabeled), InvalidInput);
}

TEST(LabeledMoment, UnitRows) {
  PartiallyLabeledDataset d;
  d.features.resize(2, 2);
  d.features << 1, 0, 0, 1;
  d.labels.resize(2);
  d.labels << 2, 0;
  const Vector b = labeled_moment(d);
  EXPECT_NEAR(b[0], 1.0, 1e-15);
  EXPECT_NEAR(b[1], 0.0, 1e-15);
}

TEST(LabeledMoment, ZeroLabelsGiveZeroVector) {
  auto d = random_dataset(4, 6, 3, 5);
  d.labels.setZero();
  EXPECT_LT(labeled_moment(d).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LabeledMoment, MatchesPerEntrySummation) {
  const auto d = random_dataset(5, 9, 3, 23);
  const Vector b = labeled_moment(d);
  for (Index j = 0; j < 3; ++j) {
    double sum = 0.0;
    for (Index i = 0; i < 5; ++i) sum += d.labels[i] * d.features(i, j);
    EXPECT_NEAR(b[j], sum / 5.0, 1e-14);
  }
}

TEST(Bounds, DeclaredBoundsAreChecked) {
  auto d = from_csv("x1,y\n1,2\n");
  d.bounds = Bounds{0.5, 3.0, false};
  EXPECT_THROW(d.validate(), InvalidInput);
  d.bounds = Bounds{1.0, 3.0, false};
  EXPECT_NO_THROW(d.validate());
  EXPECT_TRUE(d.inferred_bounds().inferred);
  EXPECT_DOUBLE_EQ(d.inferred_bounds().label_bound, 2.0);
}
