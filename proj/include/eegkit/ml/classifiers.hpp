#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegkit/error.hpp"
#include "eegkit/features.hpp"

namespace eegkit::ml {

/// A fitted classifier reduced to its decision function.
using Predictor = std::function<int(const Eigen::RowVectorXd&)>;
/// Fits on (rows, labels) and returns a predictor; used by cross-validation and feature selection.
using ClassifierFitter = std::function<Predictor(const Eigen::MatrixXd&, std::span<const int>)>;

namespace detail {

inline void check_training(const Eigen::MatrixXd& X, std::span<const int> y, const char* who) {
  if (X.rows() == 0) throw Error(std::string(who) + ": empty training set");
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw Error(std::string(who) + ": " + std::to_string(X.rows()) + " rows but " + std::to_string(y.size()) +
                " labels");
  if (!X.allFinite()) throw Error(std::string(who) + ": non-finite feature values");
}

inline void check_row(const Eigen::RowVectorXd& row, Eigen::Index d, const char* who) {
  if (row.size() != d)
    throw Error(std::string(who) + ": expected " + std::to_string(d) + " features, got " + std::to_string(row.size()));
}

// Class labels in order of first appearance.
inline std::vector<int> classes_in_order(std::span<const int> y) {
  std::vector<int> out;
  for (int v : y)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Gaussian naive Bayes

struct GaussianNB {
  std::vector<int> classes;      // training order
  Eigen::VectorXd log_priors;    // per class
  Eigen::MatrixXd means;         // classes x d
  Eigen::MatrixXd variances;     // classes x d, floored
};

inline GaussianNB gnb_fit(const Eigen::MatrixXd& X, std::span<const int> y) {
  detail::check_training(X, y, "gnb_fit");
  GaussianNB m;
  m.classes = detail::classes_in_order(y);
  if (m.classes.size() < 2) throw Error("gnb_fit: training set contains a single class");
  const auto C = static_cast<Eigen::Index>(m.classes.size());
  const auto d = X.cols();
  const double n = static_cast<double>(X.rows());

  // Per-feature floor: 1e-9 * (global variance + 1e-12).
  const Eigen::RowVectorXd gmean = X.colwise().mean();
  const Eigen::RowVectorXd floor = 1e-9 * ((X.rowwise() - gmean).array().square().colwise().mean() + 1e-12);

  m.log_priors.resize(C);
  m.means.setZero(C, d);
  m.variances.setZero(C, d);
  for (Eigen::Index c = 0; c < C; ++c) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == m.classes[static_cast<std::size_t>(c)]) idx.push_back(static_cast<Eigen::Index>(i));
    const double nc = static_cast<double>(idx.size());
    m.log_priors(c) = std::log(nc / n);
    for (auto i : idx) m.means.row(c) += X.row(i);
    m.means.row(c) /= nc;
    for (auto i : idx) m.variances.row(c) += (X.row(i) - m.means.row(c)).array().square().matrix();
    m.variances.row(c) /= nc;
    m.variances.row(c) = m.variances.row(c).cwiseMax(floor);
  }
  return m;
}

/// Unnormalized log posterior (log prior + sum of log likelihoods) per class.
inline Eigen::VectorXd gnb_log_joint(const GaussianNB& m, const Eigen::RowVectorXd& row) {
  detail::check_row(row, m.means.cols(), "gnb_predict");
  const auto C = m.log_priors.size();
  Eigen::VectorXd out(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    double ll = m.log_priors(c);
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      const double v = m.variances(c, j);
      const double diff = row(j) - m.means(c, j);
      ll += -0.5 * std::log(2.0 * std::numbers::pi * v) - diff * diff / (2.0 * v);
    }
    out(c) = ll;
  }
  return out;
}

/// Posterior probabilities, parallel to `m.classes`.
inline Eigen::VectorXd gnb_posterior(const GaussianNB& m, const Eigen::RowVectorXd& row) {
  Eigen::VectorXd lj = gnb_log_joint(m, row);
  const double mx = lj.maxCoeff();
  Eigen::VectorXd p = (lj.array() - mx).exp();
  return p / p.sum();
}

/// Argmax of the log joint; exact ties go to the class seen first in training.
inline int gnb_predict(const GaussianNB& m, const Eigen::RowVectorXd& row) {
  const Eigen::VectorXd lj = gnb_log_joint(m, row);
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < lj.size(); ++c)
    if (lj(c) > lj(best)) best = c;
  return m.classes[static_cast<std::size_t>(best)];
}

// ---------------------------------------------------------------------------------------------
// Logistic regression

struct LogisticOptions {
  double l2 = 1e-3;
  double learning_rate = 0.1;
  int max_iter = 5000;
  double tol = 1e-6;
};

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_trace;  // loss after each accepted step, starting with the initial loss
};

namespace detail {

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void check_binary(std::span<const int> y, const char* who) {
  for (int v : y)
    if (v != 0 && v != 1) throw Error(std::string(who) + ": labels must be 0 or 1");
}

}  // namespace detail

/// Mean cross-entropy plus (l2 / 2) * |w|^2; the bias is not regularized.
inline double logistic_loss(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& w, double b,
                            double l2) {
  const Eigen::VectorXd z = (X * w).array() + b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += detail::softplus(z(i)) - y[static_cast<std::size_t>(i)] * z(i);
  return loss / static_cast<double>(z.size()) + 0.5 * l2 * w.squaredNorm();
}

/// Gradient of logistic_loss; the last entry is d/db.
inline Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& w,
                                         double b, double l2) {
  const Eigen::VectorXd z = (X * w).array() + b;
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r(i) = detail::sigmoid(z(i)) - y[static_cast<std::size_t>(i)];
  const double n = static_cast<double>(z.size());
  Eigen::VectorXd g(X.cols() + 1);
  g.head(X.cols()) = X.transpose() * r / n + l2 * w;
  g(X.cols()) = r.sum() / n;
  return g;
}

/// Gradient descent; a step that increases the loss is retried at half the rate.
inline LogisticModel logistic_fit(const Eigen::MatrixXd& X, std::span<const int> y, const LogisticOptions& opt = {}) {
  detail::check_training(X, y, "logistic_fit");
  detail::check_binary(y, "logistic_fit");
  LogisticModel m;
  m.weights = Eigen::VectorXd::Zero(X.cols());
  double loss = logistic_loss(X, y, m.weights, m.bias, opt.l2);
  m.loss_trace.push_back(loss);
  double lr = opt.learning_rate;
  for (int it = 0; it < opt.max_iter; ++it) {
    const Eigen::VectorXd g = logistic_gradient(X, y, m.weights, m.bias, opt.l2);
    if (g.cwiseAbs().maxCoeff() < opt.tol) {
      m.converged = true;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const Eigen::VectorXd w = m.weights - lr * g.head(X.cols());
      const double b = m.bias - lr * g(X.cols());
      const double next = logistic_loss(X, y, w, b, opt.l2);
      if (next <= loss) {
        m.weights = w;
        m.bias = b;
        loss = next;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    m.iterations = it + 1;
    if (!accepted) {
      // No decrease is reachable along the gradient at machine precision.
      m.converged = true;
      break;
    }
    m.loss_trace.push_back(loss);
  }
  return m;
}

inline double logistic_probability(const LogisticModel& m, const Eigen::RowVectorXd& row) {
  detail::check_row(row, m.weights.size(), "logistic_predict");
  return detail::sigmoid(row.dot(m.weights) + m.bias);
}

inline int logistic_predict(const LogisticModel& m, const Eigen::RowVectorXd& row) {
  return logistic_probability(m, row) >= 0.5 ? 1 : 0;
}

// ---------------------------------------------------------------------------------------------
// k nearest neighbours

struct KnnModel {
  Eigen::MatrixXd points;
  std::vector<int> labels;
  std::size_t k = 5;
};

inline KnnModel knn_fit(const Eigen::MatrixXd& X, std::span<const int> y, std::size_t k = 5) {
  detail::check_training(X, y, "knn_fit");
  if (k < 1 || k > static_cast<std::size_t>(X.rows()))
    throw Error("knn_fit: k = " + std::to_string(k) + " must be in [1, " + std::to_string(X.rows()) + "]");
  return {X, std::vector<int>(y.begin(), y.end()), k};
}

/// Majority vote of the k nearest (Euclidean) points. Equal distances keep training order; a tied vote
/// goes to the tied class with the smallest mean neighbour distance.
inline int knn_predict(const KnnModel& m, const Eigen::RowVectorXd& row) {
  detail::check_row(row, m.points.cols(), "knn_predict");
  const auto n = static_cast<std::size_t>(m.points.rows());
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i)
    dist[i] = {(m.points.row(static_cast<Eigen::Index>(i)) - row).norm(), i};
  std::stable_sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<int> classes;
  std::vector<std::size_t> votes;
  std::vector<double> dsum;
  for (std::size_t r = 0; r < m.k; ++r) {
    const int c = m.labels[dist[r].second];
    auto it = std::find(classes.begin(), classes.end(), c);
    std::size_t ci = static_cast<std::size_t>(it - classes.begin());
    if (it == classes.end()) {
      classes.push_back(c);
      votes.push_back(0);
      dsum.push_back(0.0);
    }
    ++votes[ci];
    dsum[ci] += dist[r].first;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes.size(); ++c) {
    if (votes[c] > votes[best]) {
      best = c;
    } else if (votes[c] == votes[best]) {
      const double mc = dsum[c] / static_cast<double>(votes[c]);
      const double mb = dsum[best] / static_cast<double>(votes[best]);
      if (mc < mb) best = c;
    }
  }
  return classes[best];
}

// ---------------------------------------------------------------------------------------------
// Fitters for the validation harness

inline ClassifierFitter gnb_fitter() {
  return [](const Eigen::MatrixXd& X, std::span<const int> y) -> Predictor {
    auto model = std::make_shared<GaussianNB>(gnb_fit(X, y));
    return [model](const Eigen::RowVectorXd& r) { return gnb_predict(*model, r); };
  };
}

inline ClassifierFitter logistic_fitter(LogisticOptions opt = {}) {
  return [opt](const Eigen::MatrixXd& X, std::span<const int> y) -> Predictor {
    auto model = std::make_shared<LogisticModel>(logistic_fit(X, y, opt));
    return [model](const Eigen::RowVectorXd& r) { return logistic_predict(*model, r); };
  };
}

inline ClassifierFitter knn_fitter(std::size_t k = 5) {
  return [k](const Eigen::MatrixXd& X, std::span<const int> y) -> Predictor {
    auto model = std::make_shared<KnnModel>(knn_fit(X, y, std::min<std::size_t>(k, static_cast<std::size_t>(X.rows()))));
    return [model](const Eigen::RowVectorXd& r) { return knn_predict(*model, r); };
  };
}

/// Z-scores features with statistics of the training rows only, then delegates.
inline ClassifierFitter standardized(ClassifierFitter inner) {
  return [inner = std::move(inner)](const Eigen::MatrixXd& X, std::span<const int> y) -> Predictor {
    auto z = std::make_shared<ZScore>(ZScore::fit(X));
    Predictor p = inner(z->apply(X), y);
    return [z, p = std::move(p)](const Eigen::RowVectorXd& r) {
      return p(((r - z->means).array() / z->stds.array()).matrix());
    };
  };
}

}  // namespace eegkit::ml
