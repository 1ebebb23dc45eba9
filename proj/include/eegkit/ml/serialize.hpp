#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "eegkit/error.hpp"
#include "eegkit/features.hpp"
#include "eegkit/ml/classifiers.hpp"
#include "eegkit/ml/pca.hpp"
#include "eegkit/ml/regression.hpp"

// JSON export/import of fitted models. Every document carries a "model" tag.

namespace eegkit::ml {

namespace detail {

template <typename Derived>
nlohmann::json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("model json: expected a matrix");
  const auto R = static_cast<Eigen::Index>(j.size());
  const auto C = R > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(R, C);
  for (Eigen::Index r = 0; r < R; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != C) throw Error("model json: ragged matrix");
    for (Eigen::Index c = 0; c < C; ++c) m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

template <typename Derived>
std::vector<double> vec(const Eigen::DenseBase<Derived>& v) {
  return std::vector<double>(v.derived().data(), v.derived().data() + v.size());
}

inline Eigen::VectorXd to_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline void expect_tag(const nlohmann::json& j, const char* tag) {
  if (!j.contains("model") || j["model"] != tag) throw Error(std::string("model json: expected model '") + tag + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const GaussianNB& m) {
  return {{"model", "gnb"},
          {"classes", m.classes},
          {"log_priors", detail::vec(m.log_priors)},
          {"means", detail::matrix_to_json(m.means)},
          {"variances", detail::matrix_to_json(m.variances)}};
}

inline GaussianNB gnb_from_json(const nlohmann::json& j) {
  detail::expect_tag(j, "gnb");
  GaussianNB m;
  m.classes = j.at("classes").get<std::vector<int>>();
  m.log_priors = detail::to_vector(j.at("log_priors"));
  m.means = detail::matrix_from_json(j.at("means"));
  m.variances = detail::matrix_from_json(j.at("variances"));
  return m;
}

inline nlohmann::json to_json(const LogisticModel& m) {
  return {{"model", "logistic"},
          {"weights", detail::vec(m.weights)},
          {"bias", m.bias},
          {"iterations", m.iterations},
          {"converged", m.converged}};
}

inline LogisticModel logistic_from_json(const nlohmann::json& j) {
  detail::expect_tag(j, "logistic");
  LogisticModel m;
  m.weights = detail::to_vector(j.at("weights"));
  m.bias = j.at("bias").get<double>();
  m.iterations = j.value("iterations", 0);
  m.converged = j.value("converged", false);
  return m;
}

inline nlohmann::json to_json(const KnnModel& m) {
  return {{"model", "knn"}, {"k", m.k}, {"labels", m.labels}, {"points", detail::matrix_to_json(m.points)}};
}

inline KnnModel knn_from_json(const nlohmann::json& j) {
  detail::expect_tag(j, "knn");
  KnnModel m;
  m.k = j.at("k").get<std::size_t>();
  m.labels = j.at("labels").get<std::vector<int>>();
  m.points = detail::matrix_from_json(j.at("points"));
  return m;
}

inline nlohmann::json to_json(const LinearModel& m) {
  return {{"model", "linear"}, {"coefficients", detail::vec(m.coefficients)}, {"intercept", m.intercept}};
}

inline LinearModel linear_from_json(const nlohmann::json& j) {
  detail::expect_tag(j, "linear");
  return {detail::to_vector(j.at("coefficients")), j.at("intercept").get<double>()};
}

inline nlohmann::json to_json(const PcaModel& m) {
  return {{"model", "pca"},
          {"components", detail::matrix_to_json(m.components)},
          {"means", detail::vec(m.means)},
          {"explained_variance", detail::vec(m.explained_variance)},
          {"total_variance", m.total_variance}};
}

inline PcaModel pca_from_json(const nlohmann::json& j) {
  detail::expect_tag(j, "pca");
  PcaModel m;
  m.components = detail::matrix_from_json(j.at("components"));
  m.means = detail::to_vector(j.at("means")).transpose();
  m.explained_variance = detail::to_vector(j.at("explained_variance"));
  m.total_variance = j.at("total_variance").get<double>();
  return m;
}

inline nlohmann::json to_json(const ZScore& z) {
  return {{"model", "zscore"}, {"means", detail::vec(z.means)}, {"stds", detail::vec(z.stds)}};
}

inline ZScore zscore_from_json(const nlohmann::json& j) {
  detail::expect_tag(j, "zscore");
  return {detail::to_vector(j.at("means")).transpose(), detail::to_vector(j.at("stds")).transpose()};
}

}  // namespace eegkit::ml
