#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eegkit/error.hpp"
#include "eegkit/io.hpp"

namespace eegkit::ml {

/// Binary classification scores with class 1 (ASD) as the positive class.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  /// confusion[actual][predicted], index 1 = positive.
  std::array<std::array<std::size_t, 2>, 2> confusion{};

  std::size_t tp() const noexcept { return confusion[1][1]; }
  std::size_t fp() const noexcept { return confusion[0][1]; }
  std::size_t fn() const noexcept { return confusion[1][0]; }
  std::size_t tn() const noexcept { return confusion[0][0]; }
};

inline Metrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.confusion = {{{tn, fp}, {fn, tp}}};
  const auto total = tp + fp + fn + tn;
  if (total == 0) throw Error("metrics: empty input");
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.accuracy = ratio(tp + tn, total);
  return m;
}

inline Metrics compute_metrics(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw Error("compute_metrics: prediction and label counts differ");
  if (preds.empty()) throw Error("compute_metrics: empty input");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if ((preds[i] != 0 && preds[i] != 1) || (labels[i] != 0 && labels[i] != 1))
      throw Error("compute_metrics: labels must be binary (0/1)");
    if (labels[i] == 1)
      (preds[i] == 1 ? tp : fn)++;
    else
      (preds[i] == 1 ? fp : tn)++;
  }
  return metrics_from_confusion(tp, fp, fn, tn);
}

struct RegressionMetrics {
  double r2 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

/// r2 = 1 - SSE/SST; undefined (error) for a constant target.
inline RegressionMetrics compute_regression_metrics(std::span<const double> preds, std::span<const double> truth) {
  if (preds.size() != truth.size()) throw Error("regression metrics: prediction and target counts differ");
  if (truth.empty()) throw Error("regression metrics: empty input");
  const double n = static_cast<double>(truth.size());
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= n;
  double sse = 0.0, sst = 0.0, sae = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = preds[i] - truth[i];
    sse += e * e;
    sae += std::abs(e);
    sst += (truth[i] - mean) * (truth[i] - mean);
  }
  if (!(sst > 0.0)) throw Error("regression metrics: r2 is undefined for a constant target");
  return {1.0 - sse / sst, sae / n, std::sqrt(sse / n)};
}

/// Columns: Classifier, Precision, Recall, F1, Accuracy.
inline std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& rows) {
  std::string out = "Classifier,Precision,Recall,F1,Accuracy\n";
  for (const auto& [name, m] : rows)
    out += name + "," + io::format_double(m.precision) + "," + io::format_double(m.recall) + "," +
           io::format_double(m.f1) + "," + io::format_double(m.accuracy) + "\n";
  return out;
}

/// Columns: Model, r2, MAE, RMSE.
inline std::string regression_csv(const std::vector<std::pair<std::string, RegressionMetrics>>& rows) {
  std::string out = "Model,r2,MAE,RMSE\n";
  for (const auto& [name, m] : rows)
    out += name + "," + io::format_double(m.r2) + "," + io::format_double(m.mae) + "," + io::format_double(m.rmse) +
           "\n";
  return out;
}

}  // namespace eegkit::ml
