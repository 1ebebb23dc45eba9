#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegkit/error.hpp"
#include "eegkit/feature_table.hpp"
#include "eegkit/fft.hpp"
#include "eegkit/filters.hpp"
#include "eegkit/recording.hpp"

namespace eegkit {

inline std::vector<double> channel_means(const Recording& rec) {
  if (rec.channels() == 0) throw Error("channel_means: recording has no channels");
  std::vector<double> out;
  for (const auto& ch : rec.data) {
    if (ch.empty()) throw Error("channel_means: empty channel");
    double s = 0.0;
    for (double v : ch) s += v;
    out.push_back(s / static_cast<double>(ch.size()));
  }
  return out;
}

/// Population standard deviation (divisor n) per channel.
inline std::vector<double> channel_stds(const Recording& rec) {
  if (rec.samples() < 2) throw Error("channel_stds: need at least two samples");
  const auto means = channel_means(rec);
  std::vector<double> out;
  for (std::size_t c = 0; c < rec.channels(); ++c) {
    double s = 0.0;
    for (double v : rec.data[c]) s += (v - means[c]) * (v - means[c]);
    out.push_back(std::sqrt(s / static_cast<double>(rec.data[c].size())));
  }
  return out;
}

inline constexpr std::size_t kDefaultEntropyBins = 64;

/// -sum p_i log2 p_i over an equal-width amplitude histogram spanning [min, max].
inline double shannon_entropy(std::span<const double> x, std::size_t bins = kDefaultEntropyBins) {
  if (bins < 2) throw Error("shannon_entropy: need at least two bins");
  if (x.empty()) throw Error("shannon_entropy: empty series");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw Error("shannon_entropy: non-finite values");
  if (!(hi > lo)) return 0.0;
  std::vector<std::size_t> counts(bins, 0);
  const double width = hi - lo;
  for (double v : x) {
    auto b = static_cast<std::size_t>(static_cast<double>(bins) * (v - lo) / width);
    ++counts[std::min(b, bins - 1)];
  }
  double h = 0.0;
  const double n = static_cast<double>(x.size());
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

/// Mean DFT magnitude over the bins with frequency in [lo, hi) of each band.
inline std::vector<double> fft_band_features(std::span<const double> x, double fs,
                                             const std::vector<BandSpec>& bands = default_bands()) {
  if (!(fs > 0.0)) throw Error("fft_band_features: sampling rate must be positive");
  if (static_cast<double>(x.size()) < fs) throw Error("fft_band_features: need at least one second of data");
  const auto spec = fft::rfft(x);
  const double df = fs / static_cast<double>(x.size());
  std::vector<double> out;
  for (const auto& b : bands) {
    if (b.hi > fs / 2.0)
      throw Error("fft_band_features: band '" + b.name + "' extends beyond Nyquist (" + std::to_string(fs / 2.0) +
                  " Hz)");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const double f = static_cast<double>(k) * df;
      if (f >= b.lo && f < b.hi) {
        sum += std::abs(spec[k]);
        ++count;
      }
    }
    if (count == 0) throw Error("fft_band_features: band '" + b.name + "' contains no frequency bins");
    out.push_back(sum / static_cast<double>(count));
  }
  return out;
}

/// A named per-subject feature vector, e.g. "mean" over channels.
struct FeatureSource {
  std::string name;
  std::vector<std::string> columns;
};

struct SubjectFeatures {
  std::string subject_id;
  std::optional<Diagnosis> label;
  std::optional<int> score;
  std::map<std::string, std::vector<double>> sources;  // source name -> values (parallel to its columns)
};

/// Column statistics retained so the same scaling can be applied to unseen rows.
struct ZScore {
  Eigen::RowVectorXd means;
  Eigen::RowVectorXd stds;  // 1 for constant columns

  static ZScore fit(const Eigen::MatrixXd& rows) {
    ZScore z;
    z.means = rows.colwise().mean();
    z.stds.resize(rows.cols());
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const double var = (rows.col(c).array() - z.means(c)).square().mean();
      z.stds(c) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return z;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != means.size()) throw Error("zscore: column count mismatch");
    return (rows.rowwise() - means).array().rowwise() / stds.array();
  }
};

struct AssembledTable {
  FeatureTable table;
  std::optional<ZScore> normalization;
};

/// Concatenates sources in the given order (each source's own column order) into one row per subject.
inline AssembledTable assemble(const std::vector<SubjectFeatures>& subjects, const std::vector<FeatureSource>& sources,
                               bool normalize = false) {
  if (subjects.empty()) throw Error("assemble: no subjects");
  if (sources.empty()) throw Error("assemble: no feature sources");
  AssembledTable out;
  auto& t = out.table;
  for (const auto& s : sources)
    for (const auto& c : s.columns) t.feature_names.push_back(c);
  t.rows.resize(static_cast<Eigen::Index>(subjects.size()), static_cast<Eigen::Index>(t.feature_names.size()));

  bool all_labels = true, all_scores = true;
  for (std::size_t r = 0; r < subjects.size(); ++r) {
    const auto& subj = subjects[r];
    Eigen::Index col = 0;
    for (const auto& src : sources) {
      auto it = subj.sources.find(src.name);
      if (it == subj.sources.end())
        throw Error("assemble: subject '" + subj.subject_id + "' is missing source '" + src.name + "'");
      if (it->second.size() != src.columns.size())
        throw Error("assemble: subject '" + subj.subject_id + "' source '" + src.name + "' has " +
                    std::to_string(it->second.size()) + " values, expected " + std::to_string(src.columns.size()));
      for (double v : it->second) t.rows(static_cast<Eigen::Index>(r), col++) = v;
    }
    t.subject_ids.push_back(subj.subject_id);
    all_labels = all_labels && subj.label.has_value();
    all_scores = all_scores && subj.score.has_value();
  }
  if (all_labels) {
    t.labels.emplace();
    for (const auto& s : subjects) t.labels->push_back(*s.label);
  }
  if (all_scores) {
    t.scores.emplace();
    for (const auto& s : subjects) t.scores->push_back(*s.score);
  }
  if (normalize) {
    out.normalization = ZScore::fit(t.rows);
    t.rows = out.normalization->apply(t.rows);
  }
  t.check();
  return out;
}

/// Column names "<prefix>_<label>" for a per-channel source.
inline std::vector<std::string> per_channel_columns(const std::string& prefix, const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.push_back(prefix + "_" + l);
  return out;
}

}  // namespace eegkit
