#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegkit/error.hpp"
#include "eegkit/feature_table.hpp"
#include "eegkit/filters.hpp"
#include "eegkit/io.hpp"
#include "eegkit/recording.hpp"

namespace eegkit {

/// Bands x windows matrix of windowed band power for one electrode.
struct PowerMatrix {
  std::string electrode;
  std::vector<BandSpec> bands;
  Eigen::MatrixXd values;  // |bands| x J
  double window_s = 5.0;
  double step_s = 2.0;
  double fs = 0.0;

  std::size_t windows() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

namespace detail {

inline std::size_t seconds_to_samples(double seconds, double fs, const char* what) {
  const double s = seconds * fs;
  const auto n = static_cast<std::size_t>(std::llround(s));
  if (!(seconds > 0.0) || n == 0) throw Error(std::string(what) + " must be positive");
  return n;
}

}  // namespace detail

/// Full windows of `window_s` seconds stepped by `step_s` seconds that fit in `n` samples.
/// Partial trailing windows are not counted.
inline std::size_t window_count(std::size_t n, double window_s, double step_s, double fs) {
  const auto w = detail::seconds_to_samples(window_s, fs, "window");
  const auto e = detail::seconds_to_samples(step_s, fs, "step");
  if (n < w) return 0;
  return (n - w) / e + 1;
}

/// (1/W) * sum_{k=0}^{fW-1} |x[E f j + k]|^2, with W in seconds.
inline double window_power(std::span<const double> x, double window_s, double step_s, std::size_t j, double fs) {
  const auto w = detail::seconds_to_samples(window_s, fs, "window");
  const auto e = detail::seconds_to_samples(step_s, fs, "step");
  const std::size_t start = e * j;
  if (start + w > x.size())
    throw Error("window_power: window " + std::to_string(j) + " [" + std::to_string(start) + ", " +
                std::to_string(start + w) + ") overruns series of " + std::to_string(x.size()) + " samples");
  double acc = 0.0;
  for (std::size_t k = 0; k < w; ++k) acc += x[start + k] * x[start + k];
  return acc / window_s;
}

/// Windowed power of already band-limited series, one row per series.
inline PowerMatrix power_matrix_from_bands(const Decomposition& dec, double window_s, double step_s, double fs,
                                           std::string electrode = {}) {
  if (dec.bands.empty()) throw Error("power_matrix: no bands");
  const std::size_t n = dec.bands.front().samples.size();
  const std::size_t J = window_count(n, window_s, step_s, fs);
  if (J == 0) throw Error("power_matrix: series of " + std::to_string(n) + " samples is shorter than one window");
  PowerMatrix m;
  m.electrode = std::move(electrode);
  m.window_s = window_s;
  m.step_s = step_s;
  m.fs = fs;
  m.values.resize(static_cast<Eigen::Index>(dec.bands.size()), static_cast<Eigen::Index>(J));
  for (std::size_t i = 0; i < dec.bands.size(); ++i) {
    m.bands.push_back(dec.bands[i].band);
    for (std::size_t j = 0; j < J; ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          window_power(dec.bands[i].samples, window_s, step_s, j, fs);
  }
  return m;
}

/// Band-filters `x` once per band, then fills M[i][j] with the windowed power of band i at step j.
inline PowerMatrix power_matrix(const std::vector<BandSpec>& bands, std::span<const double> x, double window_s,
                                double step_s, double fs, std::string electrode = {},
                                int order = kDefaultFilterOrder) {
  const auto w = detail::seconds_to_samples(window_s, fs, "window");
  if (x.size() < w)
    throw Error("power_matrix: series of " + std::to_string(x.size()) + " samples is shorter than one window");
  return power_matrix_from_bands(band_decompose(x, fs, bands, order), window_s, step_s, fs, std::move(electrode));
}

/// Per-electrode power matrices for every channel of a recording.
inline std::vector<PowerMatrix> power_matrices(const Recording& rec, const std::vector<BandSpec>& bands,
                                               double window_s = 5.0, double step_s = 2.0,
                                               int order = kDefaultFilterOrder) {
  std::vector<PowerMatrix> out;
  out.reserve(rec.channels());
  for (std::size_t c = 0; c < rec.channels(); ++c)
    out.push_back(power_matrix(bands, rec.data[c], window_s, step_s, rec.fs, rec.labels[c], order));
  return out;
}

/// One row per window index: the selected electrodes' band powers concatenated, named "<electrode>_<band>".
inline FeatureTable short_term_samples(const std::vector<PowerMatrix>& mats, const ElectrodeSet& set,
                                       const std::string& subject_id = {}) {
  if (set.names.empty()) throw Error("short_term_samples: empty electrode set");
  std::vector<const PowerMatrix*> chosen;
  for (const auto& name : set.names) {
    const PowerMatrix* found = nullptr;
    for (const auto& m : mats)
      if (m.electrode == name) found = &m;
    if (!found) throw Error("short_term_samples: no power matrix for electrode '" + name + "'");
    chosen.push_back(found);
  }
  const auto& ref = *chosen.front();
  for (const auto* m : chosen) {
    if (m->windows() != ref.windows())
      throw Error("short_term_samples: electrode '" + m->electrode + "' has " + std::to_string(m->windows()) +
                  " windows, expected " + std::to_string(ref.windows()));
    if (m->bands != ref.bands || m->window_s != ref.window_s || m->step_s != ref.step_s)
      throw Error("short_term_samples: electrode '" + m->electrode + "' uses different bands or windowing");
  }

  const auto nb = static_cast<Eigen::Index>(ref.bands.size());
  FeatureTable t;
  t.rows.resize(static_cast<Eigen::Index>(ref.windows()), nb * static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t e = 0; e < chosen.size(); ++e) {
    for (const auto& b : ref.bands) t.feature_names.push_back(chosen[e]->electrode + "_" + b.name);
    t.rows.middleCols(static_cast<Eigen::Index>(e) * nb, nb) = chosen[e]->values.transpose();
  }
  t.subject_ids.assign(ref.windows(), subject_id);
  return t;
}

/// CSV: header of window start times in seconds, one row per band.
inline std::string to_csv(const PowerMatrix& m) {
  std::string out = "band";
  for (std::size_t j = 0; j < m.windows(); ++j) out += "," + io::format_double(static_cast<double>(j) * m.step_s);
  out += '\n';
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    out += m.bands[static_cast<std::size_t>(i)].name;
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) out += "," + io::format_double(m.values(i, j));
    out += '\n';
  }
  return out;
}

}  // namespace eegkit
