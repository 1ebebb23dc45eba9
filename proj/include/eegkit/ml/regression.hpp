#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>

#include <Eigen/Dense>

#include "eegkit/error.hpp"

namespace eegkit::ml {

struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
};

/// Least squares through the normal equations of the centred data. A ridge of 1e-12 * mean diagonal keeps
/// the system positive definite; underdetermined problems (rows <= columns) fall back to a ridge of 1e-6.
inline LinearModel linreg_fit(const Eigen::MatrixXd& X, std::span<const double> y) {
  if (X.rows() == 0) throw Error("linreg_fit: empty training set");
  if (static_cast<std::size_t>(X.rows()) != y.size()) throw Error("linreg_fit: row and target counts differ");
  if (!X.allFinite()) throw Error("linreg_fit: non-finite feature values");
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(y.size()));
  const double ymean = target.mean();
  if (!((target.array() - ymean).abs().maxCoeff() > 0.0)) throw Error("linreg_fit: target is constant");

  const Eigen::RowVectorXd xmean = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xmean;
  const Eigen::VectorXd yc = target.array() - ymean;
  Eigen::MatrixXd A = Xc.transpose() * Xc;
  const auto d = A.rows();
  const double scale = d > 0 ? A.trace() / static_cast<double>(d) : 0.0;
  const double ridge = X.rows() > X.cols() ? 1e-12 * (scale > 0.0 ? scale : 1.0) : 1e-6;
  A.diagonal().array() += ridge;

  LinearModel m;
  m.coefficients = A.ldlt().solve(Xc.transpose() * yc);
  m.intercept = ymean - xmean.dot(m.coefficients);
  return m;
}

inline double linreg_predict(const LinearModel& m, const Eigen::RowVectorXd& row) {
  if (row.size() != m.coefficients.size()) throw Error("linreg_predict: feature count mismatch");
  return row.dot(m.coefficients) + m.intercept;
}

using Regressor = std::function<double(const Eigen::RowVectorXd&)>;
using RegressorFitter = std::function<Regressor(const Eigen::MatrixXd&, std::span<const double>)>;

inline RegressorFitter linreg_fitter() {
  return [](const Eigen::MatrixXd& X, std::span<const double> y) -> Regressor {
    auto model = std::make_shared<LinearModel>(linreg_fit(X, y));
    return [model](const Eigen::RowVectorXd& r) { return linreg_predict(*model, r); };
  };
}

}  // namespace eegkit::ml
