#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eegkit/error.hpp"
#include "eegkit/fft.hpp"
#include "eegkit/filters.hpp"
#include "eegkit/io.hpp"
#include "eegkit/recording.hpp"

namespace eegkit {

struct WelchParams {
  double segment_s = 2.0;
  double overlap = 0.5;
};

/// Averaged auto- and cross-spectra (one-sided density) on a shared grid.
struct SpectralEstimate {
  std::vector<double> freqs;
  std::vector<double> psd_u;
  std::vector<double> psd_v;
  std::vector<std::complex<double>> cross;  // E[U conj(V)]
  std::size_t segments = 0;
};

/// Hann-windowed, mean-detrended FFTs of every Welch segment of one series.
struct SegmentSpectra {
  std::vector<double> freqs;
  std::vector<std::vector<std::complex<double>>> segments;
  double scale = 1.0;  // density normalization 1 / (fs * sum w^2)
  std::size_t length = 0;  // samples per segment
};

inline SegmentSpectra segment_spectra(std::span<const double> x, double fs, const WelchParams& p = {}) {
  if (!(fs > 0.0)) throw Error("welch: sampling rate must be positive");
  if (!(p.overlap >= 0.0 && p.overlap < 1.0)) throw Error("welch: overlap must be in [0, 1)");
  const auto nper = static_cast<std::size_t>(std::llround(p.segment_s * fs));
  if (nper < 2) throw Error("welch: segment shorter than two samples");
  const auto noverlap = static_cast<std::size_t>(std::floor(p.overlap * static_cast<double>(nper)));
  const std::size_t step = nper - noverlap;
  const std::size_t K = x.size() >= nper ? (x.size() - nper) / step + 1 : 0;
  if (K < 2)
    throw Error("welch: " + std::to_string(x.size()) + " samples give " + std::to_string(K) +
                " segment(s) of " + std::to_string(nper) + "; at least 2 are required");

  std::vector<double> w(nper);
  double wss = 0.0;
  for (std::size_t i = 0; i < nper; ++i) {
    // periodic Hann
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nper));
    wss += w[i] * w[i];
  }

  SegmentSpectra out;
  out.scale = 1.0 / (fs * wss);
  out.length = nper;
  fft::RealPlan plan(nper);
  for (std::size_t k = 0; k < plan.bins(); ++k) out.freqs.push_back(static_cast<double>(k) * fs / static_cast<double>(nper));
  std::vector<double> seg(nper);
  for (std::size_t s = 0; s < K; ++s) {
    const auto first = x.begin() + static_cast<std::ptrdiff_t>(s * step);
    double mean = 0.0;
    for (std::size_t i = 0; i < nper; ++i) mean += first[static_cast<std::ptrdiff_t>(i)];
    mean /= static_cast<double>(nper);
    for (std::size_t i = 0; i < nper; ++i) seg[i] = (first[static_cast<std::ptrdiff_t>(i)] - mean) * w[i];
    std::vector<std::complex<double>> spec(plan.bins());
    plan.execute(seg, spec);
    out.segments.push_back(std::move(spec));
  }
  return out;
}

inline SpectralEstimate cross_spectra(const SegmentSpectra& u, const SegmentSpectra& v) {
  if (u.segments.size() != v.segments.size() || u.length != v.length || u.freqs != v.freqs)
    throw Error("welch: segment layouts of the two series differ");
  const std::size_t K = u.segments.size();
  const std::size_t B = u.freqs.size();
  SpectralEstimate est;
  est.freqs = u.freqs;
  est.segments = K;
  est.psd_u.assign(B, 0.0);
  est.psd_v.assign(B, 0.0);
  est.cross.assign(B, {});
  for (std::size_t s = 0; s < K; ++s) {
    for (std::size_t k = 0; k < B; ++k) {
      const auto& a = u.segments[s][k];
      const auto& b = v.segments[s][k];
      est.psd_u[k] += std::norm(a);
      est.psd_v[k] += std::norm(b);
      est.cross[k] += a * std::conj(b);
    }
  }
  for (std::size_t k = 0; k < B; ++k) {
    // One-sided density: double every bin except DC and, for even segment lengths, Nyquist.
    const bool edge = k == 0 || (u.length % 2 == 0 && k == B - 1);
    const double f = u.scale / static_cast<double>(K) * (edge ? 1.0 : 2.0);
    est.psd_u[k] *= f;
    est.psd_v[k] *= f;
    est.cross[k] *= f;
  }
  return est;
}

/// Hann-windowed Welch estimate with `overlap` fractional segment overlap.
inline SpectralEstimate welch_spectra(std::span<const double> u, std::span<const double> v, double fs,
                                      const WelchParams& p = {}) {
  if (u.size() != v.size()) throw Error("welch: series lengths differ");
  return cross_spectra(segment_spectra(u, fs, p), segment_spectra(v, fs, p));
}

/// Magnitude-squared coherence with a mask of excluded (zero-power) bins.
struct Coherence {
  std::vector<double> freqs;
  std::vector<double> values;
  std::vector<bool> masked;

  std::size_t unmasked() const {
    return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), false));
  }
};

/// Largest tolerated excess of a raw coherence estimate over 1 before clamping.
inline constexpr double kClampTolerance = 1e-9;

/// C^2 = |S_uv|^2 / (S_uu S_vv). Bins where either auto-spectrum vanishes are masked.
inline Coherence msc(const SpectralEstimate& est) {
  if (est.segments < 2) throw Error("msc: at least two segments are required");
  const std::size_t B = est.freqs.size();
  double max_u = 0.0, max_v = 0.0;
  for (std::size_t k = 0; k < B; ++k) {
    max_u = std::max(max_u, est.psd_u[k]);
    max_v = std::max(max_v, est.psd_v[k]);
  }
  Coherence c;
  c.freqs = est.freqs;
  c.values.assign(B, 0.0);
  c.masked.assign(B, true);
  for (std::size_t k = 0; k < B; ++k) {
    const double pu = est.psd_u[k];
    const double pv = est.psd_v[k];
    if (!(pu > 1e-14 * max_u) || !(pv > 1e-14 * max_v) || pu <= 0.0 || pv <= 0.0) continue;
    const double raw = std::norm(est.cross[k]) / (pu * pv);
    if (raw > 1.0 + kClampTolerance || raw < 0.0)
      throw Error("msc: coherence estimate " + std::to_string(raw) + " at " + std::to_string(est.freqs[k]) +
                  " Hz is outside [0, 1]");
    c.values[k] = std::clamp(raw, 0.0, 1.0);
    c.masked[k] = false;
  }
  if (c.unmasked() == 0) throw Error("msc: every frequency bin has zero power");
  return c;
}

namespace detail {

// Trapezoidal average of the unmasked bins with freqs in [lo, hi]. Integrates each contiguous run and
// divides by the summed run extent; falls back to the plain mean when every run is a single bin.
inline double average_coherence(const Coherence& c, double lo, double hi) {
  double area = 0.0, extent = 0.0, sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < c.freqs.size(); ++k) {
    if (c.masked[k] || c.freqs[k] < lo || c.freqs[k] > hi) continue;
    sum += c.values[k];
    ++count;
    const std::size_t n = k + 1;
    if (n < c.freqs.size() && !c.masked[n] && c.freqs[n] <= hi) {
      const double df = c.freqs[n] - c.freqs[k];
      area += 0.5 * (c.values[k] + c.values[n]) * df;
      extent += df;
    }
  }
  if (count == 0) throw Error("coherence: no usable frequency bins in [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "] Hz");
  const double p = extent > 0.0 ? area / extent : sum / static_cast<double>(count);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

/// (1/T) * integral of C^2 over the unmasked bins, T being the bandwidth they span.
inline double integrated_coherence(const Coherence& c) {
  if (c.freqs.empty()) throw Error("integrated_coherence: empty spectrum");
  return detail::average_coherence(c, c.freqs.front(), c.freqs.back());
}

/// Integrated coherence restricted to each band's [lo, hi].
inline std::vector<double> band_coherence(const Coherence& c, const std::vector<BandSpec>& bands) {
  std::vector<double> out;
  for (const auto& b : bands) {
    if (c.freqs.empty() || b.lo > c.freqs.back() || b.hi < c.freqs.front())
      throw Error("band_coherence: band '" + b.name + "' lies outside the frequency grid");
    out.push_back(detail::average_coherence(c, b.lo, b.hi));
  }
  return out;
}

struct PairCoherence {
  std::string first;
  std::string second;
  Coherence coherence;
  double integrated = 0.0;
  std::vector<double> band_values;
};

struct Montage {
  std::vector<std::string> left;
  std::vector<std::string> right;

  static Montage social_brain() {
    return {ElectrodeSet::left_hemisphere().names, ElectrodeSet::right_hemisphere().names};
  }
};

struct CoherenceReport {
  std::vector<BandSpec> bands;
  std::vector<PairCoherence> left_pairs;
  std::vector<PairCoherence> right_pairs;
  double left_mean = 0.0;
  double right_mean = 0.0;
  std::vector<double> left_band_means;
  std::vector<double> right_band_means;
};

/// Unordered pairs (i < j) in list order.
inline std::vector<std::pair<std::string, std::string>> electrode_pairs(const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j) out.emplace_back(names[i], names[j]);
  return out;
}

/// Mean integrated coherence over all intra-hemisphere electrode pairs, per side and per band.
inline CoherenceReport hemispheric_scores(const Recording& rec, const Montage& montage = Montage::social_brain(),
                                          const std::vector<BandSpec>& bands = default_bands(),
                                          const WelchParams& params = {}) {
  CoherenceReport report;
  report.bands = bands;
  auto side = [&](const std::vector<std::string>& names, std::vector<PairCoherence>& pairs, double& mean,
                  std::vector<double>& band_means) {
    if (names.size() < 2) throw Error("hemispheric_scores: need at least two electrodes per hemisphere");
    std::vector<SegmentSpectra> specs;
    for (const auto& n : names) {
      if (!rec.index_of(n)) throw Error("hemispheric_scores: recording lacks electrode '" + n + "'");
      specs.push_back(segment_spectra(rec.channel(n), rec.fs, params));
    }
    band_means.assign(bands.size(), 0.0);
    for (std::size_t i = 0; i < names.size(); ++i) {
      for (std::size_t j = i + 1; j < names.size(); ++j) {
        PairCoherence pc;
        pc.first = names[i];
        pc.second = names[j];
        pc.coherence = msc(cross_spectra(specs[i], specs[j]));
        pc.integrated = integrated_coherence(pc.coherence);
        pc.band_values = band_coherence(pc.coherence, bands);
        mean += pc.integrated;
        for (std::size_t b = 0; b < bands.size(); ++b) band_means[b] += pc.band_values[b];
        pairs.push_back(std::move(pc));
      }
    }
    mean /= static_cast<double>(pairs.size());
    for (auto& v : band_means) v /= static_cast<double>(pairs.size());
  };
  side(montage.left, report.left_pairs, report.left_mean, report.left_band_means);
  side(montage.right, report.right_pairs, report.right_mean, report.right_band_means);
  return report;
}

/// One row per pair (P and per-band P), then one summary row per hemisphere.
inline std::string to_csv(const CoherenceReport& r) {
  std::string out = "hemisphere,electrode_i,electrode_j,P";
  for (const auto& b : r.bands) out += ",P_" + b.name;
  out += '\n';
  auto rows = [&](const char* side, const std::vector<PairCoherence>& pairs, double mean,
                  const std::vector<double>& band_means) {
    for (const auto& p : pairs) {
      out += std::string(side) + "," + p.first + "," + p.second + "," + io::format_double(p.integrated);
      for (double v : p.band_values) out += "," + io::format_double(v);
      out += '\n';
    }
    out += std::string(side) + ",mean,," + io::format_double(mean);
    for (double v : band_means) out += "," + io::format_double(v);
    out += '\n';
  };
  rows("left", r.left_pairs, r.left_mean, r.left_band_means);
  rows("right", r.right_pairs, r.right_mean, r.right_band_means);
  return out;
}

}  // namespace eegkit
