#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stacklp/error.hpp"
#include "stacklp/random.hpp"
#include "stacklp/svm.hpp"
#include "support.hpp"

using namespace stacklp;
using support::labels;

namespace {

LabeledDataset make(const MatrixXd& x, const Labels& t) {
  LabeledDataset ds;
  ds.features = x;
  ds.targets = t;
  for (Index j = 0; j < x.cols(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
  ds.id = "toy";
  return ds;
}

LabeledDataset pair_dataset() {
  MatrixXd x(2, 1);
  x << 0.0, 1.0;
  return make(x, labels({-1, 1}));
}

SvmParams params(double cost, double gamma, FeatureScaling scaling = FeatureScaling::none) {
  SvmParams p;
  p.cost = cost;
  p.gamma = gamma;
  p.scaling = scaling;
  return p;
}

VectorXd point(std::initializer_list<double> v) {
  VectorXd x(static_cast<Index>(v.size()));
  Index i = 0;
  for (const double a : v) x(i++) = a;
  return x;
}

}  // namespace

TEST(Svm, SymmetricPairHasAntisymmetricScores) {
  for (const auto scaling : {FeatureScaling::none, FeatureScaling::standardize, FeatureScaling::min_max}) {
    const auto model = train_svm(pair_dataset(), params(1000.0, 1.0, scaling));
    EXPECT_LT(decision_score(model, point({0.0})), 0.0);
    EXPECT_GT(decision_score(model, point({1.0})), 0.0);
    EXPECT_NEAR(decision_score(model, point({0.5})), 0.0, 1e-6);
    for (const double x : {-2.0, 0.1, 0.3, 0.45}) {
      EXPECT_NEAR(decision_score(model, point({x})), -decision_score(model, point({1.0 - x})), 1e-6) << x;
    }
  }
}

TEST(Svm, XorIsSeparatedWithNarrowKernel) {
  MatrixXd x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  const auto ds = make(x, labels({-1, -1, 1, 1}));
  const auto model = train_svm(ds, params(100.0, 10.0));
  const VectorXd scores = decision_scores(model, x);
  for (Index i = 0; i < 4; ++i) EXPECT_GT(ds.targets(i) * scores(i), 0.0) << "row " << i;
}

TEST(Svm, DualMatchesActiveSetOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    MatrixXd x = MatrixXd::NullaryExpr(6, 2, [&] { return rng.uniform() * 2.0 - 1.0; });
    const Labels t = labels({1, 1, 1, -1, -1, -1});
    const double gamma = 0.5 + 2.0 * rng.uniform();
    const double cost = 0.3 + 3.0 * rng.uniform();
    const MatrixXd k = rbf_kernel(x, x, gamma);
    const auto smo = solve_smo(k, t, cost, 1e-8, 1'000'000);
    ASSERT_TRUE(smo.converged);
    const double best = oracle::svm_dual_maximum(k, t, cost);
    EXPECT_NEAR(svm_dual_objective(k, t, smo.alpha), best, 1e-4) << "trial " << trial;
    EXPECT_LE(svm_dual_objective(k, t, smo.alpha), best + 1e-9);
  }
}

TEST(Svm, SmoSatisfiesKktAndDualConstraints) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 10 + static_cast<Index>(rng.below(30));
    MatrixXd x = MatrixXd::NullaryExpr(n, 3, [&] { return rng.uniform() * 4.0 - 2.0; });
    Labels t(n);
    for (Index i = 0; i < n; ++i) t(i) = (x(i, 0) + 0.5 * x(i, 1) + 0.8 * (rng.uniform() - 0.5) > 0) ? 1 : -1;
    t(0) = 1;
    t(1) = -1;
    const double cost = std::pow(2.0, rng.uniform() * 8.0 - 2.0);
    const double tol = 1e-3;
    const MatrixXd k = rbf_kernel(x, x, 0.7);
    const auto smo = solve_smo(k, t, cost, tol, 10'000'000);
    ASSERT_TRUE(smo.converged);
    const VectorXd y = t.cast<double>();
    EXPECT_NEAR(smo.alpha.dot(y), 0.0, 1e-6);
    EXPECT_GE(smo.alpha.minCoeff(), -1e-8);
    EXPECT_LE(smo.alpha.maxCoeff(), cost + 1e-8);
    const VectorXd f = k * smo.alpha.cwiseProduct(y) + VectorXd::Constant(n, smo.bias);
    for (Index i = 0; i < n; ++i) {
      const double margin = y(i) * f(i);
      if (smo.alpha(i) <= 1e-8) {
        EXPECT_GE(margin, 1.0 - tol) << i;
      } else if (smo.alpha(i) >= cost - 1e-8) {
        EXPECT_LE(margin, 1.0 + tol) << i;
      } else {
        EXPECT_NEAR(margin, 1.0, tol) << i;
      }
    }
  }
}

TEST(Svm, RetainedMultipliersStayInBox) {
  MatrixXd x(5, 1);
  x << 0.0, 0.2, 0.4, 0.6, 1.0;
  const auto model = train_svm(make(x, labels({-1, 1, -1, 1, 1})), params(2.0, 3.0));
  EXPECT_GT(model.coefficients.size(), 0);
  EXPECT_LE(model.coefficients.cwiseAbs().maxCoeff(), 2.0 + 1e-8);
  EXPECT_GT(model.coefficients.cwiseAbs().minCoeff(), 0.0);
  EXPECT_NEAR(model.coefficients.sum(), 0.0, 1e-6);
}

TEST(Svm, IterationBudgetReportsNonConvergence) {
  Rng rng(3);
  MatrixXd x = MatrixXd::NullaryExpr(40, 2, [&] { return rng.uniform(); });
  Labels t(40);
  for (Index i = 0; i < 40; ++i) t(i) = rng.bernoulli(0.5) ? 1 : -1;
  t(0) = 1;
  t(1) = -1;
  SvmParams p = params(1000.0, 5.0);
  p.max_iterations = 2;
  const auto model = train_svm(make(x, t), p);
  EXPECT_FALSE(model.converged);
  EXPECT_EQ(model.iterations, 2);
}

TEST(Svm, EmptyModelScoresItsBias) {
  SvmModel model;
  model.support_vectors = MatrixXd(0, 2);
  model.coefficients = VectorXd(0);
  model.bias = -0.375;
  model.scaler.mean = VectorXd::Zero(2);
  model.scaler.scale = VectorXd::Ones(2);
  EXPECT_DOUBLE_EQ(decision_score(model, point({3.0, -1.0})), -0.375);
}

TEST(Svm, RejectsBadInput) {
  const auto model = train_svm(pair_dataset(), params(1.0, 1.0));
  EXPECT_THROW(decision_score(model, point({1.0, 2.0})), Error);
  EXPECT_THROW(train_svm(pair_dataset(), params(0.0, 1.0)), Error);
  EXPECT_THROW(train_svm(pair_dataset(), params(1.0, -1.0)), Error);
  MatrixXd x(2, 1);
  x << 0.0, 1.0;
  try {
    train_svm(make(x, labels({1, 1})), params(1.0, 1.0));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::single_class);
  }
}

TEST(Standardizer, MapsTrainingColumns) {
  MatrixXd x(3, 2);
  x << 1, 5, 2, 5, 3, 5;
  const auto z = Standardizer::fit(x, FeatureScaling::standardize).apply(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-12);
  EXPECT_NEAR(z.col(0).squaredNorm() / 2.0, 1.0, 1e-12);
  EXPECT_TRUE(z.col(1).isZero());  // constant column only loses its mean
  const auto r = Standardizer::fit(x, FeatureScaling::min_max).apply(x);
  EXPECT_DOUBLE_EQ(r(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(r(2, 0), 1.0);
  EXPECT_TRUE(Standardizer::fit(x, FeatureScaling::none).apply(x).isApprox(x));
}

TEST(Knn, TrainingPointReturnsItsLabel) {
  MatrixXd x(4, 2);
  x << 0, 0, 1, 0, 0, 1, 5, 5;
  const auto ds = make(x, labels({1, -1, -1, 1}));
  for (Index i = 0; i < 4; ++i) EXPECT_EQ(knn_predict(ds, x.row(i).transpose(), 1), ds.targets(i));
}

TEST(Knn, BalancedFullVoteGoesPositive) {
  MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  const auto ds = make(x, labels({-1, 1, -1, 1}));
  EXPECT_EQ(knn_predict(ds, point({-10.0}), 4), 1);
  EXPECT_EQ(knn_predict(ds, point({10.0}), 2), 1);
}

TEST(Knn, NearestToLonePositive) {
  MatrixXd x(3, 1);
  x << 0, 1, 2;
  const auto ds = make(x, labels({-1, -1, 1}));
  EXPECT_EQ(knn_predict(ds, point({1.8}), 1), 1);
  EXPECT_EQ(knn_predict(ds, point({1.2}), 1), -1);
  EXPECT_EQ(knn_predict(ds, point({1.8}), 3), -1);
}

TEST(Knn, RejectsBadK) {
  const auto ds = pair_dataset();
  EXPECT_THROW(knn_predict(ds, point({0.0}), 0), Error);
  EXPECT_THROW(knn_predict(ds, point({0.0}), 3), Error);
  EXPECT_THROW(knn_predict(ds, point({0.0, 1.0}), 1), Error);
}
