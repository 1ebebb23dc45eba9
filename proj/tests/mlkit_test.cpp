#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "eegkit/ml/classifiers.hpp"
#include "eegkit/ml/metrics.hpp"
#include "eegkit/ml/pca.hpp"
#include "eegkit/ml/regression.hpp"
#include "eegkit/ml/serialize.hpp"
#include "eegkit/ml/validation.hpp"

namespace {

using namespace eegkit;
using namespace eegkit::ml;

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = g(rng);
  return X;
}

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

// ---- metrics

TEST(Metrics, HandConfusion) {
  // 3 TP, 1 FP, 1 FN, 5 TN.
  const std::vector<int> preds = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<int> truth = {1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
  const auto m = compute_metrics(preds, truth);
  EXPECT_EQ(m.tp(), 3u);
  EXPECT_EQ(m.fp(), 1u);
  EXPECT_EQ(m.fn(), 1u);
  EXPECT_EQ(m.tn(), 5u);
  EXPECT_EQ(m.precision, 0.75);
  EXPECT_EQ(m.recall, 0.75);
  EXPECT_EQ(m.f1, 0.75);
  EXPECT_EQ(m.accuracy, 0.8);
}

TEST(Metrics, ConventionsAndErrors) {
  const std::vector<int> y = {1, 0, 1, 0};
  const auto perfect = compute_metrics(y, y);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  EXPECT_EQ(perfect.accuracy, 1.0);
  const auto none = compute_metrics(std::vector<int>{0, 0, 0, 0}, y);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(none.accuracy, 0.5);
  EXPECT_THROW(compute_metrics(std::vector<int>{}, std::vector<int>{}), Error);
  EXPECT_THROW(compute_metrics(std::vector<int>{2}, std::vector<int>{1}), Error);
  EXPECT_EQ(metrics_csv({{"GNB", perfect}}), "Classifier,Precision,Recall,F1,Accuracy\nGNB,1,1,1,1\n");
}

TEST(Metrics, InvariantsOverRandomConfusions) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 200; ++t) {
    const std::size_t tp = rng() % 6, fp = rng() % 6, fn = rng() % 6, tn = 1 + rng() % 6;
    const auto m = metrics_from_confusion(tp, fp, fn, tn);
    EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(tp + tn) / static_cast<double>(tp + fp + fn + tn));
    if (m.precision + m.recall > 0) EXPECT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-15);
    for (double v : {m.precision, m.recall, m.f1, m.accuracy}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(RegressionMetrics, RmseBoundsMae) {
  const std::vector<double> t = {1, 2, 3, 4, 10};
  const std::vector<double> p = {1.5, 2, 2, 5, 7};
  const auto m = compute_regression_metrics(p, t);
  EXPECT_NEAR(m.mae, (0.5 + 0 + 1 + 1 + 3) / 5.0, 1e-15);
  EXPECT_NEAR(m.rmse, std::sqrt((0.25 + 0 + 1 + 1 + 9) / 5.0), 1e-15);
  EXPECT_GE(m.rmse, m.mae);
  EXPECT_THROW(compute_regression_metrics(p, std::vector<double>(5, 2.0)), Error);
}

// ---- Gaussian naive Bayes

TEST(Gnb, HandComputedPosterior) {
  Eigen::MatrixXd X(6, 2);
  X << 1, 2, 2, 3, 3, 1, -1, 0, 0, -2, -2, -1;
  const std::vector<int> y = {1, 1, 1, 0, 0, 0};
  const auto m = gnb_fit(X, y);
  // Class 1: means (2, 2), variances (2/3, 2/3). Class 0: means (-1, -1), variances (2/3, 2/3).
  EXPECT_NEAR(m.means(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(m.variances(1, 1), 2.0 / 3.0, 1e-15);
  // At (0.5, 0) the squared distances over 2 var are 6.25 * 0.75 and 3.25 * 0.75.
  const double p1 = 1.0 / (1.0 + std::exp(6.25 * 0.75 - 3.25 * 0.75));
  const auto post = gnb_posterior(m, row({0.5, 0.0}));
  EXPECT_NEAR(post(0), p1, 1e-9);
  EXPECT_NEAR(post(1), 1.0 - p1, 1e-9);
  EXPECT_EQ(gnb_predict(m, row({0.5, 0.0})), 0);
  // Unequal priors: drop one class-0 point.
  const auto m5 = gnb_fit(X.topRows(5), std::vector<int>{1, 1, 1, 0, 0});
  const double v0 = 0.25;  // class 0 = {(-1,0),(0,-2)}: means (-0.5,-1), variances (0.25, 1)
  const double v1 = 1.0;
  const double lj1 = std::log(0.6) - std::log(2 * std::numbers::pi * 2.0 / 3.0) - (2.25 + 4.0) * 0.75;
  const double lj0 = std::log(0.4) - 0.5 * std::log(2 * std::numbers::pi * v0) - 0.5 * std::log(2 * std::numbers::pi * v1) -
                     1.0 / (2 * v0) - 1.0 / (2 * v1);
  const auto p = gnb_posterior(m5, row({0.5, 0.0}));
  EXPECT_NEAR(p(0), std::exp(lj1) / (std::exp(lj1) + std::exp(lj0)), 1e-9);
}

TEST(Gnb, SymmetricTieGoesToFirstClass) {
  Eigen::MatrixXd X(4, 1);
  X << 0, 2, -2, 0;  // means +1 and -1, unit variance
  auto m = gnb_fit(X, std::vector<int>{1, 1, 0, 0});
  const auto post = gnb_posterior(m, row({0.0}));
  EXPECT_NEAR(post(0), 0.5, 1e-12);
  EXPECT_EQ(gnb_predict(m, row({0.0})), 1);
  EXPECT_EQ(gnb_predict(m, row({1.0})), 1);
  m = gnb_fit(X.colwise().reverse(), std::vector<int>{0, 0, 1, 1});
  EXPECT_EQ(gnb_predict(m, row({0.0})), 0);
  EXPECT_THROW(gnb_fit(X, std::vector<int>{1, 1, 1, 1}), Error);
}

TEST(Gnb, VarianceFloorKeepsConstantFeaturesFinite) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 5, 2, 5, -1, 5, -2, 5;
  const auto m = gnb_fit(X, std::vector<int>{1, 1, 0, 0});
  EXPECT_GT(m.variances.minCoeff(), 0.0);
  EXPECT_TRUE(gnb_log_joint(m, row({1.5, 5.0})).allFinite());
}

TEST(Gnb, AffineRescalingInvariance) {
  Eigen::MatrixXd X = gaussian(60, 3, 4);
  std::vector<int> y(60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    y[static_cast<std::size_t>(i)] = i % 2;
    X(i, 0) += i % 2 ? 1.0 : -1.0;
  }
  const Eigen::RowVectorXd a = row({3.0, -0.5, 100.0}), b = row({10.0, 2.0, -7.0});
  const Eigen::MatrixXd Xs = (X.array().rowwise() * a.array()).rowwise() + b.array();
  const auto m = gnb_fit(X, y), ms = gnb_fit(Xs, y);
  const Eigen::MatrixXd T = gaussian(200, 3, 5, 2.0);
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    const Eigen::RowVectorXd t = T.row(i);
    const Eigen::RowVectorXd ts = (t.array() * a.array() + b.array()).matrix();
    EXPECT_EQ(gnb_predict(m, t), gnb_predict(ms, ts));
  }
}

// ---- logistic regression

TEST(Logistic, GradientMatchesFiniteDifferences) {
  const Eigen::MatrixXd X = gaussian(12, 4, 9);
  const std::vector<int> y = {1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 0};
  const Eigen::VectorXd w = gaussian(4, 1, 10).col(0);
  const double b = 0.3, l2 = 0.05, eps = 1e-5;
  const auto g = logistic_gradient(X, y, w, b, l2);
  double worst = 0.0;
  for (Eigen::Index j = 0; j <= 4; ++j) {
    Eigen::VectorXd wp = w, wm = w;
    double bp = b, bm = b;
    if (j < 4) {
      wp(j) += eps;
      wm(j) -= eps;
    } else {
      bp += eps;
      bm -= eps;
    }
    const double fd = (logistic_loss(X, y, wp, bp, l2) - logistic_loss(X, y, wm, bm, l2)) / (2 * eps);
    worst = std::max(worst, std::abs(fd - g(j)) / std::max(std::abs(g(j)), 1e-12));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Logistic, SeparableAndSymmetric) {
  Eigen::MatrixXd X(8, 1);
  X << -4, -3, -2, -1, 1, 2, 3, 4;
  const std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  const auto m = logistic_fit(X, y);
  EXPECT_LE(std::abs(m.bias), 1e-3);
  EXPECT_GT(m.weights(0), 0.0);
  for (Eigen::Index i = 0; i < 8; ++i) EXPECT_EQ(logistic_predict(m, X.row(i)), y[static_cast<std::size_t>(i)]);
  EXPECT_NEAR(logistic_probability(m, row({0.0})), 0.5, 1e-3);
  EXPECT_THROW(logistic_fit(X, std::vector<int>{0, 0, 0, 0, 1, 1, 1, 2}), Error);
}

TEST(Logistic, LossNeverIncreases) {
  Eigen::MatrixXd X = gaussian(80, 3, 12);
  std::vector<int> y(80);
  for (Eigen::Index i = 0; i < 80; ++i) y[static_cast<std::size_t>(i)] = X(i, 0) + 0.5 * X(i, 1) > 0.2 ? 1 : 0;
  for (double lr : {0.1, 5.0, 50.0}) {
    const auto m = logistic_fit(X, y, {.l2 = 1e-3, .learning_rate = lr});
    ASSERT_GE(m.loss_trace.size(), 2u);
    for (std::size_t i = 1; i < m.loss_trace.size(); ++i) EXPECT_LE(m.loss_trace[i], m.loss_trace[i - 1]);
  }
}

// ---- kNN

TEST(Knn, NearestNeighbourAndHandVote) {
  Eigen::MatrixXd X(5, 2);
  X << 0, 0, 1, 0, 0, 1, 3, 3, 4, 3;
  const std::vector<int> y = {0, 1, 1, 0, 0};
  const auto m1 = knn_fit(X, y, 1);
  EXPECT_EQ(knn_predict(m1, row({0.9, 0.1})), 1);
  EXPECT_EQ(knn_predict(m1, row({3.0, 3.0})), 0);
  // Distances from (0.4, 0.4): p0 0.566, p1 0.721, p2 0.721, p3 3.677, p4 4.561. 3-NN = {0, 1, 1} -> 1.
  const auto m3 = knn_fit(X, y, 3);
  EXPECT_EQ(knn_predict(m3, row({0.4, 0.4})), 1);
  // From (2.5, 2.5): p3 0.707, p4 1.581, p2 2.915, p1 2.915 -> {0, 0, 1} -> 0.
  EXPECT_EQ(knn_predict(m3, row({2.5, 2.5})), 0);
  EXPECT_THROW(knn_fit(X, y, 6), Error);
  EXPECT_THROW(knn_fit(X, y, 0), Error);
}

TEST(Knn, VoteTieUsesMeanDistance) {
  Eigen::MatrixXd X(4, 1);
  X << 0, 1, 3, 10;
  const auto m = knn_fit(X, std::vector<int>{0, 1, 0, 1}, 2);
  // Neighbours of 0.6: 1 (0.4, class 1) and 0 (0.6, class 0). Tied vote, class 1 closer.
  EXPECT_EQ(knn_predict(m, row({0.6})), 1);
  EXPECT_EQ(knn_predict(m, row({0.4})), 0);
}

TEST(Knn, OneNnTrainingAccuracy) {
  const Eigen::MatrixXd X = gaussian(50, 3, 13);
  std::vector<int> y(50);
  for (std::size_t i = 0; i < 50; ++i) y[i] = static_cast<int>(i % 2);
  const auto m = knn_fit(X, y, 1);
  for (Eigen::Index i = 0; i < 50; ++i) EXPECT_EQ(knn_predict(m, X.row(i)), y[static_cast<std::size_t>(i)]);
}

// ---- linear regression

TEST(LinearRegression, ExactAndNoisy) {
  Eigen::MatrixXd X(6, 1);
  X << -2, -1, 0, 1, 2, 5;
  std::vector<double> y;
  for (Eigen::Index i = 0; i < 6; ++i) y.push_back(2 * X(i, 0) + 1);
  const auto m = linreg_fit(X, y);
  EXPECT_NEAR(m.coefficients(0), 2.0, 1e-9);
  EXPECT_NEAR(m.intercept, 1.0, 1e-9);
  std::vector<double> p;
  for (Eigen::Index i = 0; i < 6; ++i) p.push_back(linreg_predict(m, X.row(i)));
  EXPECT_NEAR(compute_regression_metrics(p, y).r2, 1.0, 1e-12);
  EXPECT_THROW(linreg_fit(X, std::vector<double>(6, 3.0)), Error);

  const Eigen::MatrixXd Z = gaussian(100, 2, 14);
  std::mt19937_64 rng(15);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> t;
  for (Eigen::Index i = 0; i < 100; ++i) t.push_back(1.5 * Z(i, 0) - 0.7 * Z(i, 1) + 3.0 + noise(rng));
  const auto mz = linreg_fit(Z, t);
  std::vector<double> pz;
  for (Eigen::Index i = 0; i < 100; ++i) pz.push_back(linreg_predict(mz, Z.row(i)));
  EXPECT_GE(compute_regression_metrics(pz, t).r2, 0.95);
}

TEST(LinearRegression, UnderdeterminedFallsBackToRidge) {
  const Eigen::MatrixXd X = gaussian(3, 5, 16);
  const auto m = linreg_fit(X, std::vector<double>{1.0, 2.0, 4.0});
  EXPECT_TRUE(m.coefficients.allFinite());
}

// ---- PCA

TEST(Pca, LineAndSignConvention) {
  Eigen::MatrixXd X(5, 2);
  X << -2, -2, -1, -1, 0, 0, 1, 1, 2, 2;
  const auto m = pca_fit(X, PcaSelection::components(1));
  EXPECT_NEAR(m.components(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(m.components(0, 1), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_GE(m.explained_variance_ratio()(0), 0.999);
  Eigen::MatrixXd Y = X;
  Y.col(1) *= -1.0;
  const auto my = pca_fit(Y, PcaSelection::components(1));
  Eigen::Index arg;
  my.components.row(0).cwiseAbs().maxCoeff(&arg);
  EXPECT_GT(my.components(0, arg), 0.0);
}

TEST(Pca, FullBasisRoundTripAndDiagonalCovariance) {
  Eigen::MatrixXd X = gaussian(40, 4, 17);
  X.col(1) += 0.8 * X.col(0);
  X.col(3) = 3.0 * X.col(3) - X.col(2);
  const auto m = pca_fit(X, PcaSelection::components(4));
  const Eigen::MatrixXd Z = pca_transform(m, X);
  EXPECT_LE((pca_inverse_transform(m, Z) - X).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LE((m.components * m.components.transpose() - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-9);
  const Eigen::MatrixXd cov = Z.transpose() * Z / 39.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(cov(i, i), m.explained_variance(i), 1e-9);
    for (Eigen::Index j = 0; j < 4; ++j)
      if (i != j) EXPECT_LE(std::abs(cov(i, j)), 1e-6 * m.explained_variance(0));
  }
  for (Eigen::Index i = 1; i < 4; ++i) EXPECT_LE(m.explained_variance(i), m.explained_variance(i - 1));
  EXPECT_LE(pca_transform(m, m.means).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(pca_transform(m, Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST(Pca, IsotropicCloudAndSelection) {
  const auto m = pca_fit(gaussian(20000, 4, 18), PcaSelection::components(4));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(m.explained_variance_ratio()(i), 0.25, 0.025);
  Eigen::MatrixXd X = gaussian(100, 3, 19);
  X.col(0) *= 10.0;
  EXPECT_EQ(pca_fit(X, PcaSelection::variance(0.9)).size(), 1);
  EXPECT_EQ(pca_fit(X, PcaSelection::variance(1.0)).size(), 3);
  EXPECT_THROW(pca_fit(X, PcaSelection::components(4)), Error);
  EXPECT_THROW(pca_fit(Eigen::MatrixXd::Ones(5, 2), PcaSelection::components(1)), Error);
}

// ---- cross-validation

TEST(CrossValidation, LoocvFoldsMatchManualEnumeration) {
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto f = make_folds(n, CvScheme::loocv());
    ASSERT_EQ(f.test.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(f.test[i], std::vector<std::size_t>{i});
  }
}

TEST(CrossValidation, LoocvPredictionsMatchManualLoop) {
  Eigen::MatrixXd X(6, 2);
  X << 0, 0.1, 0.2, 0.1, 1, 1.1, 1.2, 0.9, 0.1, 0.3, 1.1, 1.3;
  const std::vector<int> y = {0, 0, 1, 1, 0, 1};
  const auto res = cross_validate(X, y, knn_fitter(3), CvScheme::loocv());
  for (Eigen::Index i = 0; i < 6; ++i) {
    Eigen::MatrixXd train(5, 2);
    std::vector<int> ty;
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < 6; ++j)
      if (j != i) {
        train.row(r++) = X.row(j);
        ty.push_back(y[static_cast<std::size_t>(j)]);
      }
    EXPECT_EQ(res.predictions[static_cast<std::size_t>(i)], knn_predict(knn_fit(train, ty, 3), X.row(i)));
  }
}

TEST(CrossValidation, MajorityBaseRate) {
  const Eigen::MatrixXd X = gaussian(10, 1, 20);
  const std::vector<int> y = {1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
  ClassifierFitter majority = [](const Eigen::MatrixXd&, std::span<const int> t) -> Predictor {
    const auto ones = std::count(t.begin(), t.end(), 1);
    const int c = 2 * ones >= static_cast<long>(t.size()) ? 1 : 0;
    return [c](const Eigen::RowVectorXd&) { return c; };
  };
  EXPECT_DOUBLE_EQ(cross_validate(X, y, majority, CvScheme::kfold(5)).metrics.accuracy, 0.6);
}

TEST(CrossValidation, KfoldPartitionsAndStratifies) {
  std::vector<int> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = i < 30 ? 1 : 0;
  const auto f = make_folds(100, CvScheme::kfold(10), y, 7);
  EXPECT_TRUE(f.warnings.empty());
  std::vector<int> seen(100, 0);
  for (const auto& fold : f.test) {
    EXPECT_EQ(fold.size(), 10u);
    int pos = 0;
    for (auto i : fold) {
      ++seen[i];
      pos += y[i];
    }
    EXPECT_EQ(pos, 3);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  // Same seed, same folds; another seed differs.
  EXPECT_EQ(make_folds(100, CvScheme::kfold(10), y, 7).test, f.test);
  EXPECT_NE(make_folds(100, CvScheme::kfold(10), y, 8).test, f.test);
}

TEST(CrossValidation, SmallClassFallsBackWithWarning) {
  std::vector<int> y(20, 0);
  y[0] = y[1] = 1;
  const auto f = make_folds(20, CvScheme::kfold(5), y, 1);
  EXPECT_EQ(f.warnings.size(), 1u);
  std::set<std::size_t> all;
  for (const auto& fold : f.test) all.insert(fold.begin(), fold.end());
  EXPECT_EQ(all.size(), 20u);
  EXPECT_THROW(make_folds(20, CvScheme::kfold(21), y), Error);
  EXPECT_THROW(make_folds(20, CvScheme::kfold(1), y), Error);
}

TEST(CrossValidation, BitwiseReproducible) {
  const Eigen::MatrixXd X = gaussian(40, 3, 21);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 2);
  const auto a = cross_validate(X, y, standardized(logistic_fitter()), CvScheme::kfold(5), 3);
  const auto b = cross_validate(X, y, standardized(logistic_fitter()), CvScheme::kfold(5), 3);
  EXPECT_EQ(a.predictions, b.predictions);
  EXPECT_EQ(a.metrics.accuracy, b.metrics.accuracy);
}

TEST(CrossValidation, RegressionLoocv) {
  const Eigen::MatrixXd X = gaussian(20, 1, 22);
  std::vector<double> y;
  for (Eigen::Index i = 0; i < 20; ++i) y.push_back(-3.0 * X(i, 0) + 1.0);
  const auto r = cross_validate(X, std::span<const double>(y), linreg_fitter(), CvScheme::loocv());
  EXPECT_NEAR(r.metrics.r2, 1.0, 1e-9);
  EXPECT_EQ(r.folds.test.size(), 20u);
}

// ---- sequential forward selection

TEST(Sfs, PredictiveColumnFirstAndTies) {
  Eigen::MatrixXd X = gaussian(40, 5, 23);
  std::vector<int> y(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    y[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
    X(i, 3) = static_cast<double>(i % 2);
  }
  const auto sel = sfs_select(X, y, gnb_fitter(), 2, 5, 1);
  ASSERT_FALSE(sel.empty());
  EXPECT_EQ(sel[0], 3u);
  EXPECT_EQ(sel.size(), 1u);  // already perfect, nothing improves

  X.col(1) = X.col(3);
  EXPECT_EQ(sfs_select(X, y, gnb_fitter(), 2, 5, 1)[0], 1u);
  EXPECT_TRUE(sfs_select(X, y, gnb_fitter(), 0, 5, 1).empty());
  EXPECT_THROW(sfs_select(X, std::vector<int>(40, 1), gnb_fitter(), 1, 5), Error);
  EXPECT_THROW(sfs_select(X, y, gnb_fitter(), 6, 5), Error);
}

// ---- model export

TEST(Serialize, RoundTrips) {
  const Eigen::MatrixXd X = gaussian(30, 3, 24);
  std::vector<int> y(30);
  std::vector<double> t(30);
  for (std::size_t i = 0; i < 30; ++i) {
    y[i] = static_cast<int>(i % 2);
    t[i] = X(static_cast<Eigen::Index>(i), 0) + static_cast<double>(i % 3);
  }
  const auto probe = X.row(4);

  const auto g = gnb_fit(X, y);
  EXPECT_EQ(gnb_log_joint(gnb_from_json(nlohmann::json::parse(to_json(g).dump())), probe), gnb_log_joint(g, probe));
  const auto l = logistic_fit(X, y);
  EXPECT_EQ(logistic_probability(logistic_from_json(nlohmann::json::parse(to_json(l).dump())), probe),
            logistic_probability(l, probe));
  const auto k = knn_fit(X, y, 3);
  EXPECT_EQ(knn_from_json(nlohmann::json::parse(to_json(k).dump())).points, k.points);
  const auto lin = linreg_fit(X, t);
  EXPECT_EQ(linreg_predict(linear_from_json(nlohmann::json::parse(to_json(lin).dump())), probe), linreg_predict(lin, probe));
  const auto p = pca_fit(X, PcaSelection::components(2));
  EXPECT_EQ(pca_transform(pca_from_json(nlohmann::json::parse(to_json(p).dump())), X), pca_transform(p, X));
  const auto z = ZScore::fit(X);
  EXPECT_EQ(zscore_from_json(nlohmann::json::parse(to_json(z).dump())).apply(X), z.apply(X));
  EXPECT_THROW(gnb_from_json(to_json(l)), Error);
}

}  // namespace
