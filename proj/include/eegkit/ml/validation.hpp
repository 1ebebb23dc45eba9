#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegkit/error.hpp"
#include "eegkit/ml/classifiers.hpp"
#include "eegkit/ml/metrics.hpp"
#include "eegkit/ml/regression.hpp"

namespace eegkit::ml {

struct CvScheme {
  enum class Kind { kfold, loocv };
  Kind kind = Kind::kfold;
  std::size_t k = 10;
  bool stratified = true;

  static CvScheme kfold(std::size_t k, bool stratified = true) { return {Kind::kfold, k, stratified}; }
  static CvScheme loocv() { return {Kind::loocv, 0, false}; }
};

struct Folds {
  std::vector<std::vector<std::size_t>> test;  // disjoint, covering 0..n-1
  std::vector<std::string> warnings;
};

namespace detail {

// Fisher-Yates with an explicit index draw so the permutation depends only on the engine.
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace detail

/// Test-index partitions. LOOCV yields {0}, {1}, ... in order. Stratified k-fold deals each class's shuffled
/// indices round-robin; if some class has fewer than k members it falls back to plain shuffled k-fold.
inline Folds make_folds(std::size_t n, const CvScheme& scheme, std::span<const int> labels = {},
                        std::uint64_t seed = 0) {
  Folds folds;
  if (n == 0) throw Error("cross-validation: no samples");
  if (scheme.kind == CvScheme::Kind::loocv) {
    for (std::size_t i = 0; i < n; ++i) folds.test.push_back({i});
    return folds;
  }
  const std::size_t k = scheme.k;
  if (k < 2 || k > n)
    throw Error("cross-validation: k = " + std::to_string(k) + " must be in [2, " + std::to_string(n) + "]");
  std::mt19937_64 rng(seed);
  folds.test.assign(k, {});

  bool stratify = scheme.stratified && labels.size() == n;
  if (stratify) {
    const auto classes = detail::classes_in_order(labels);
    for (int c : classes) {
      const auto count = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
      if (count < k) {
        folds.warnings.push_back("class " + std::to_string(c) + " has " + std::to_string(count) +
                                 " samples, fewer than k = " + std::to_string(k) + "; using unstratified folds");
        stratify = false;
        break;
      }
    }
    if (stratify) {
      auto sorted = classes;
      std::sort(sorted.begin(), sorted.end());
      std::size_t slot = 0;
      for (int c : sorted) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
          if (labels[i] == c) idx.push_back(i);
        detail::shuffle(idx, rng);
        for (auto i : idx) folds.test[slot++ % k].push_back(i);
      }
    }
  }
  if (!stratify) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    detail::shuffle(idx, rng);
    for (std::size_t f = 0; f < k; ++f)
      folds.test[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(f * n / k),
                           idx.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / k));
  }
  for (auto& f : folds.test) std::sort(f.begin(), f.end());
  return folds;
}

namespace detail {

inline std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& test) {
  std::vector<bool> in(n, false);
  for (auto i : test) in[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
  return out;
}

template <typename T>
std::vector<T> take(std::span<const T> v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace detail

struct CvResult {
  Metrics metrics;
  std::vector<int> predictions;  // pooled, indexed like the input rows
  Folds folds;
};

/// Fits on each training split, predicts the held-out fold, and scores the pooled predictions.
inline CvResult cross_validate(const Eigen::MatrixXd& X, std::span<const int> y, const ClassifierFitter& fitter,
                               const CvScheme& scheme, std::uint64_t seed = 0) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (y.size() != n) throw Error("cross_validate: row and label counts differ");
  CvResult res;
  res.folds = make_folds(n, scheme, y, seed);
  res.predictions.assign(n, -1);
  for (const auto& test : res.folds.test) {
    const auto train = detail::complement(n, test);
    if (train.empty()) throw Error("cross_validate: a fold leaves no training data");
    const auto ytrain = detail::take(y, train);
    Predictor p = fitter(detail::take_rows(X, train), ytrain);
    for (auto i : test) res.predictions[i] = p(X.row(static_cast<Eigen::Index>(i)));
  }
  res.metrics = compute_metrics(res.predictions, y);
  return res;
}

struct CvRegressionResult {
  RegressionMetrics metrics;
  std::vector<double> predictions;
  Folds folds;
};

inline CvRegressionResult cross_validate(const Eigen::MatrixXd& X, std::span<const double> y,
                                         const RegressorFitter& fitter, const CvScheme& scheme,
                                         std::uint64_t seed = 0) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (y.size() != n) throw Error("cross_validate: row and target counts differ");
  CvScheme plain = scheme;
  plain.stratified = false;
  CvRegressionResult res;
  res.folds = make_folds(n, plain, {}, seed);
  res.predictions.assign(n, 0.0);
  for (const auto& test : res.folds.test) {
    const auto train = detail::complement(n, test);
    if (train.empty()) throw Error("cross_validate: a fold leaves no training data");
    const auto ytrain = detail::take(y, train);
    Regressor r = fitter(detail::take_rows(X, train), ytrain);
    for (auto i : test) res.predictions[i] = r(X.row(static_cast<Eigen::Index>(i)));
  }
  res.metrics = compute_regression_metrics(res.predictions, y);
  return res;
}

/// Greedy forward selection by mean k-fold accuracy. Ties go to the lowest column index; stops at
/// `max_features` or when no candidate improves on the current accuracy.
inline std::vector<std::size_t> sfs_select(const Eigen::MatrixXd& X, std::span<const int> y,
                                           const ClassifierFitter& fitter, std::size_t max_features,
                                           std::size_t folds, std::uint64_t seed = 0) {
  const auto d = static_cast<std::size_t>(X.cols());
  if (max_features > d) throw Error("sfs_select: max_features exceeds the number of columns");
  if (folds < 2) throw Error("sfs_select: need at least two folds");
  if (detail::classes_in_order(y).size() < 2) throw Error("sfs_select: labels contain a single class");

  std::vector<std::size_t> selected;
  double best_so_far = -1.0;
  while (selected.size() < max_features) {
    double best = -1.0;
    std::size_t best_col = d;
    for (std::size_t c = 0; c < d; ++c) {
      if (std::find(selected.begin(), selected.end(), c) != selected.end()) continue;
      auto cols = selected;
      cols.push_back(c);
      Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j)
        sub.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(cols[j]));
      const double acc = cross_validate(sub, y, fitter, CvScheme::kfold(folds), seed).metrics.accuracy;
      if (acc > best) {
        best = acc;
        best_col = c;
      }
    }
    if (best_col == d || !(best > best_so_far)) break;
    selected.push_back(best_col);
    best_so_far = best;
  }
  return selected;
}

}  // namespace eegkit::ml
