#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "eegkit/error.hpp"

namespace eegkit::ml {

struct PcaModel {
  Eigen::MatrixXd components;           // k x d, orthonormal rows
  Eigen::RowVectorXd means;             // d
  Eigen::VectorXd explained_variance;   // k, non-increasing
  double total_variance = 0.0;

  Eigen::Index dimensions() const noexcept { return components.cols(); }
  Eigen::Index size() const noexcept { return components.rows(); }

  Eigen::VectorXd explained_variance_ratio() const { return explained_variance / total_variance; }
};

/// Either a fixed component count or the smallest count reaching a variance fraction.
struct PcaSelection {
  std::optional<std::size_t> count;
  double variance_fraction = 0.95;

  static PcaSelection components(std::size_t k) { return {k, 0.0}; }
  static PcaSelection variance(double fraction) { return {std::nullopt, fraction}; }
};

/// Eigendecomposition of the sample covariance (divisor n - 1). Each component's largest-magnitude
/// entry is made positive.
inline PcaModel pca_fit(const Eigen::MatrixXd& X, const PcaSelection& sel = {}) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (n < 2) throw Error("pca_fit: need at least two rows");
  if (d < 1) throw Error("pca_fit: no columns");

  PcaModel m;
  m.means = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - m.means;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("pca_fit: eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  Eigen::VectorXd values = eig.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();
  m.total_variance = values.sum();
  if (!(m.total_variance > 0.0)) throw Error("pca_fit: data has zero variance");

  const auto max_k = static_cast<std::size_t>(std::min<Eigen::Index>(n - 1, d));
  std::size_t k = 0;
  if (sel.count) {
    k = *sel.count;
    if (k < 1 || k > max_k)
      throw Error("pca_fit: component count " + std::to_string(k) + " outside [1, " + std::to_string(max_k) + "]");
  } else {
    if (!(sel.variance_fraction > 0.0 && sel.variance_fraction <= 1.0))
      throw Error("pca_fit: variance fraction must be in (0, 1]");
    double acc = 0.0;
    while (k < max_k) {
      acc += values(static_cast<Eigen::Index>(k));
      ++k;
      if (acc / m.total_variance >= sel.variance_fraction - 1e-12) break;
    }
  }

  const auto kk = static_cast<Eigen::Index>(k);
  m.components = vectors.leftCols(kk).transpose();
  m.explained_variance = values.head(kk);
  for (Eigen::Index r = 0; r < kk; ++r) {
    Eigen::Index arg = 0;
    m.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (m.components(r, arg) < 0.0) m.components.row(r) *= -1.0;
  }
  return m;
}

/// (rows - means) * components^T
inline Eigen::MatrixXd pca_transform(const PcaModel& m, const Eigen::MatrixXd& rows) {
  if (rows.cols() != m.dimensions())
    throw Error("pca_transform: expected " + std::to_string(m.dimensions()) + " columns, got " +
                std::to_string(rows.cols()));
  return (rows.rowwise() - m.means) * m.components.transpose();
}

inline Eigen::MatrixXd pca_inverse_transform(const PcaModel& m, const Eigen::MatrixXd& reduced) {
  if (reduced.cols() != m.size()) throw Error("pca_inverse_transform: component count mismatch");
  return (reduced * m.components).rowwise() + m.means;
}

}  // namespace eegkit::ml
