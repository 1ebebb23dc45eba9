#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegkit/error.hpp"
#include "eegkit/fft.hpp"
#include "eegkit/io.hpp"

namespace eegkit {

/// Complex Morlet: psi(t) = (pi f_b)^{-1/2} exp(2 pi i f_c t) exp(-t^2 / f_b).
struct MorletParams {
  double center_hz = 1.0;
  double bandwidth = 1.5;

  void check() const {
    if (!(center_hz > 0.0) || !(bandwidth > 0.0)) throw Error("morlet: center frequency and bandwidth must be > 0");
  }

  std::complex<double> operator()(double t) const {
    const double norm = 1.0 / std::sqrt(std::numbers::pi * bandwidth);
    return norm * std::polar(std::exp(-t * t / bandwidth), 2.0 * std::numbers::pi * center_hz * t);
  }
};

/// Scales x time power matrix for one electrode.
struct Scalogram {
  std::string electrode;
  std::vector<double> scales;  // strictly increasing, in samples
  std::vector<double> times;   // column start times, seconds
  Eigen::MatrixXd values;      // scales.size() x times.size()
  bool referenced = false;
  double fs = 0.0;
  MorletParams params;
  /// Per scale: columns of the original series within one envelope e-folding width of either edge.
  std::vector<std::size_t> edge_samples;
};

/// Scales 2, 4, ..., 2X: frequencies from fs/2 down to fs/(2X) when f_c = 1.
inline std::vector<double> scale_grid(double fs, std::size_t count) {
  if (count < 1) throw Error("scale_grid: need at least one scale");
  if (!(fs > 0.0)) throw Error("scale_grid: sampling rate must be positive");
  std::vector<double> s(count);
  for (std::size_t k = 0; k < count; ++k) s[k] = 2.0 * static_cast<double>(k + 1);
  return s;
}

inline double scale_to_freq(double scale, double fs, const MorletParams& params = {}) {
  if (!(scale > 0.0)) throw Error("scale_to_freq: scale must be positive");
  return params.center_hz * fs / scale;
}

/// Half-width (in samples) of the sampled wavelet support at `scale`: psi is evaluated on [-8, 8].
inline std::size_t wavelet_half_support(double scale) { return static_cast<std::size_t>(std::ceil(8.0 * scale)); }

/// X(a, b) = a^{-1/2} sum_t psi((t - b)/a) x[t], squared magnitude, for every scale a and sample b.
/// Evaluated as a zero-padded FFT convolution.
inline Scalogram cwt(std::span<const double> x, double fs, const std::vector<double>& scales,
                     const MorletParams& params = {}, std::string electrode = {}) {
  params.check();
  if (x.empty()) throw Error("cwt: empty series");
  if (scales.empty()) throw Error("cwt: empty scale grid");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw Error("cwt: scales must be positive");
    if (i > 0 && !(scales[i] > scales[i - 1])) throw Error("cwt: scales must be strictly increasing");
  }
  const std::size_t n = x.size();
  const double largest = scales.back();
  if (2 * wavelet_half_support(largest) + 1 > 2 * n)
    throw Error("cwt: scale " + std::to_string(largest) + " needs a wavelet support longer than twice the " +
                std::to_string(n) + "-sample series");

  const std::size_t max_half = wavelet_half_support(largest);
  const std::size_t N = fft::good_size(n + 2 * max_half);
  fft::ComplexPlan forward(N, false);
  fft::ComplexPlan inverse(N, true);

  std::vector<fft::cplx> buf(N), xs(N), ks(N);
  std::copy(x.begin(), x.end(), buf.begin());
  forward.execute(buf, xs);

  Scalogram sg;
  sg.electrode = std::move(electrode);
  sg.scales = scales;
  sg.fs = fs;
  sg.params = params;
  sg.values.resize(static_cast<Eigen::Index>(scales.size()), static_cast<Eigen::Index>(n));
  sg.times.resize(n);
  for (std::size_t b = 0; b < n; ++b) sg.times[b] = static_cast<double>(b) / fs;

  const double invN = 1.0 / static_cast<double>(N);
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const double a = scales[si];
    const std::size_t half = wavelet_half_support(a);
    const double norm = 1.0 / std::sqrt(a);
    // Kernel g[m] = a^{-1/2} psi(-m / a), stored circularly so that index m maps to m mod N.
    std::fill(buf.begin(), buf.end(), fft::cplx{});
    for (std::size_t m = 0; m <= half; ++m) {
      const double t = static_cast<double>(m) / a;
      buf[m] = norm * params(-t);
      if (m > 0) buf[N - m] = norm * params(t);
    }
    forward.execute(buf, ks);
    for (std::size_t i = 0; i < N; ++i) ks[i] *= xs[i];
    inverse.execute(ks, buf);
    for (std::size_t b = 0; b < n; ++b)
      sg.values(static_cast<Eigen::Index>(si), static_cast<Eigen::Index>(b)) = std::norm(buf[b] * invN);
    sg.edge_samples.push_back(
        std::min(n, static_cast<std::size_t>(std::ceil(a * std::sqrt(params.bandwidth)))));
  }
  return sg;
}

/// Row with the largest mean power, each row averaged outside its own edge columns.
inline std::size_t dominant_scale(const Scalogram& sg) {
  if (sg.values.rows() == 0) throw Error("dominant_scale: empty scalogram");
  const auto T = static_cast<std::size_t>(sg.values.cols());
  std::size_t best = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < sg.scales.size(); ++r) {
    std::size_t edge = r < sg.edge_samples.size() ? sg.edge_samples[r] : 0;
    if (2 * edge >= T) edge = 0;
    const double mean = sg.values.row(static_cast<Eigen::Index>(r))
                            .segment(static_cast<Eigen::Index>(edge), static_cast<Eigen::Index>(T - 2 * edge))
                            .mean();
    if (mean > best_mean) {
      best_mean = mean;
      best = r;
    }
  }
  return best;
}

/// Max-pools columns into `target_cols` contiguous groups whose sizes differ by at most one.
inline Scalogram downsample_max(const Scalogram& sg, std::size_t target_cols) {
  const auto T = static_cast<std::size_t>(sg.values.cols());
  if (target_cols == 0) throw Error("downsample_max: target column count must be positive");
  if (target_cols > T)
    throw Error("downsample_max: cannot grow " + std::to_string(T) + " columns to " + std::to_string(target_cols));
  Scalogram out = sg;
  out.values.resize(sg.values.rows(), static_cast<Eigen::Index>(target_cols));
  out.times.resize(target_cols);
  for (std::size_t g = 0; g < target_cols; ++g) {
    const std::size_t lo = g * T / target_cols;
    const std::size_t hi = (g + 1) * T / target_cols;
    out.values.col(static_cast<Eigen::Index>(g)) =
        sg.values.middleCols(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)).rowwise().maxCoeff();
    out.times[g] = sg.times[lo];
  }
  return out;
}

/// Subtracts the baseline's per-scale time mean from every column.
inline Scalogram baseline_reference(const Scalogram& sg, const Scalogram& baseline) {
  if (baseline.referenced) throw Error("baseline_reference: baseline is already referenced");
  if (sg.scales != baseline.scales) throw Error("baseline_reference: scale grids differ");
  if (baseline.values.cols() == 0) throw Error("baseline_reference: empty baseline");
  Scalogram out = sg;
  const Eigen::VectorXd means = baseline.values.rowwise().mean();
  out.values.colwise() -= means;
  out.referenced = true;
  return out;
}

/// 8-bit pixels, row-major: min -> 0, max -> 255, rounded to nearest; constant input maps to 0.
inline std::vector<std::uint8_t> to_pixels(const Eigen::MatrixXd& values) {
  if (!values.allFinite()) throw Error("export_image: non-finite values");
  std::vector<std::uint8_t> px(static_cast<std::size_t>(values.size()), 0);
  if (values.size() == 0) return px;
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (!(hi > lo)) return px;
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      px[k++] = static_cast<std::uint8_t>(std::lround(255.0 * (values(r, c) - lo) / (hi - lo)));
  return px;
}

/// Binary portable graymap (P5, maxval 255); one image row per scale.
inline std::string to_pgm(const Scalogram& sg) {
  const auto px = to_pixels(sg.values);
  std::string out = "P5\n" + std::to_string(sg.values.cols()) + " " + std::to_string(sg.values.rows()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

inline void export_image(const Scalogram& sg, const std::filesystem::path& path) {
  io::write_file_atomic(path, to_pgm(sg));
}

/// CSV: first column is the scale, then one column per time point (header carries times in seconds).
inline std::string to_csv(const Scalogram& sg) {
  std::string out = "scale";
  for (double t : sg.times) out += "," + io::format_double(t);
  out += '\n';
  for (Eigen::Index r = 0; r < sg.values.rows(); ++r) {
    out += io::format_double(sg.scales[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < sg.values.cols(); ++c) out += "," + io::format_double(sg.values(r, c));
    out += '\n';
  }
  return out;
}

}  // namespace eegkit
