#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eegkit/error.hpp"
#include "eegkit/filters.hpp"
#include "eegkit/recording.hpp"

namespace eegkit::synth {

/// splitmix64 finalizer; derives independent sub-seeds from (seed, stream).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::vector<double> sinusoid(double freq_hz, double fs, std::size_t n, double amplitude = 1.0,
                                    double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs + phase);
  return x;
}

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  return x;
}

/// Sum of band-limited Gaussian noise, each band scaled so that fs * mean(x^2) (the windowed-power
/// convention of window_power) equals its target power.
inline std::vector<double> gen_band_signal(std::span<const double> band_powers, double fs, double duration_s,
                                           std::uint64_t seed, const std::vector<BandSpec>& bands = default_bands()) {
  if (!(duration_s >= 1.0)) throw Error("gen_band_signal: duration must be at least 1 s");
  if (band_powers.size() != bands.size())
    throw Error("gen_band_signal: " + std::to_string(band_powers.size()) + " powers for " +
                std::to_string(bands.size()) + " bands");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::vector<double> out(n, 0.0);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const double target = band_powers[b];
    if (target < 0.0 || !std::isfinite(target)) throw Error("gen_band_signal: band powers must be >= 0");
    if (target == 0.0) continue;
    auto x = apply_zero_phase(design_band(bands[b], fs), white_noise(n, mix_seed(seed, b)));
    double ms = 0.0;
    for (double v : x) ms += v * v;
    ms /= static_cast<double>(n);
    const double gain = std::sqrt(target / (fs * ms));
    for (std::size_t i = 0; i < n; ++i) out[i] += gain * x[i];
  }
  return out;
}

/// Relative amplitude of the independent noise added to the shared source in the first series.
inline constexpr double kPairNoise = 0.25;

/// u = s + 0.25 n1, v = lambda s + (1 - lambda) n2 with unit-variance white s, n1, n2. Expected coherence
/// lambda^2 / ((lambda^2 + (1 - lambda)^2)(1 + 0.25^2)) rises monotonically with lambda.
inline std::pair<std::vector<double>, std::vector<double>> gen_coherent_pair(double lambda, double fs,
                                                                             double duration_s, std::uint64_t seed) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("gen_coherent_pair: lambda must be in [0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  const auto s = white_noise(n, mix_seed(seed, 0));
  const auto n1 = white_noise(n, mix_seed(seed, 1));
  const auto n2 = white_noise(n, mix_seed(seed, 2));
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = s[i] + kPairNoise * n1[i];
    v[i] = lambda * s[i] + (1.0 - lambda) * n2[i];
  }
  return {std::move(u), std::move(v)};
}

/// Group-level generative parameters.
struct GroupEffect {
  std::vector<double> band_multipliers;  // parallel to CohortSpec::bands; empty means all 1
  double right_lambda = 0.5;             // intra-right-hemisphere mixing
};

/// score = round(intercept - slope * lambda_right + N(0, sigma)), clipped to [0, 22].
struct AdosModel {
  double intercept = 24.0;
  double slope = 20.0;
  double sigma = 1.5;
};

struct CohortSpec {
  std::size_t n_asd = 8;
  std::size_t n_td = 9;
  double fs = 250.0;
  double duration_s = 200.0;
  double baseline_s = 20.0;
  std::vector<std::string> channels = ElectrodeSet::homan().names;
  std::vector<BandSpec> bands = default_bands();
  /// Windowed band powers of a TD subject, parallel to `bands` (amplitude^2 * samples / s).
  std::vector<double> base_powers = {4000.0, 2000.0, 3000.0, 1000.0, 250.0};
  GroupEffect asd{{}, 0.5};
  GroupEffect td{{}, 0.9};
  double left_lambda = 0.5;
  /// Half-width of the uniform per-subject jitter added to each lambda.
  double lambda_jitter = 0.1;
  /// Standard deviation of the per-subject log-normal band power factor.
  double power_jitter = 0.1;
  AdosModel ados;
  std::uint64_t seed = 1;

  void check() const {
    if (n_asd + n_td == 0) throw Error("cohort: zero subjects");
    if (!(fs > 0.0)) throw Error("cohort: sampling rate must be positive");
    if (!(baseline_s >= 0.0) || !(duration_s > baseline_s)) throw Error("cohort: duration must exceed baseline");
    if (channels.empty()) throw Error("cohort: no channels");
    if (base_powers.size() != bands.size()) throw Error("cohort: base_powers must parallel bands");
    for (double p : base_powers)
      if (!(p >= 0.0)) throw Error("cohort: base powers must be >= 0");
    for (const auto* g : {&asd, &td}) {
      if (!g->band_multipliers.empty() && g->band_multipliers.size() != bands.size())
        throw Error("cohort: band_multipliers must parallel bands");
      for (double m : g->band_multipliers)
        if (!(m > 0.0)) throw Error("cohort: band multipliers must be > 0");
      if (!(g->right_lambda >= 0.0 && g->right_lambda <= 1.0)) throw Error("cohort: lambda must be in [0, 1]");
    }
    if (!(left_lambda >= 0.0 && left_lambda <= 1.0)) throw Error("cohort: lambda must be in [0, 1]");
    if (!(lambda_jitter >= 0.0) || !(power_jitter >= 0.0)) throw Error("cohort: jitter must be >= 0");
  }
};

/// Per-subject draws, exposed for inspection and tests.
struct SubjectDraw {
  Diagnosis diagnosis = Diagnosis::TD;
  double right_lambda = 0.0;
  double left_lambda = 0.0;
  std::vector<double> band_powers;
  int ados2 = 0;
};

inline SubjectDraw draw_subject(const CohortSpec& spec, std::size_t index) {
  SubjectDraw d;
  d.diagnosis = index < spec.n_asd ? Diagnosis::ASD : Diagnosis::TD;
  const auto& group = d.diagnosis == Diagnosis::ASD ? spec.asd : spec.td;
  std::mt19937_64 rng(mix_seed(spec.seed, 1000 + index));
  std::uniform_real_distribution<double> jitter(-spec.lambda_jitter, spec.lambda_jitter);
  std::normal_distribution<double> gauss(0.0, 1.0);
  d.right_lambda = std::clamp(group.right_lambda + jitter(rng), 0.0, 1.0);
  d.left_lambda = std::clamp(spec.left_lambda + jitter(rng), 0.0, 1.0);
  for (std::size_t b = 0; b < spec.bands.size(); ++b) {
    const double mult = group.band_multipliers.empty() ? 1.0 : group.band_multipliers[b];
    d.band_powers.push_back(spec.base_powers[b] * mult * std::exp(spec.power_jitter * gauss(rng)));
  }
  const double raw = spec.ados.intercept - spec.ados.slope * d.right_lambda + spec.ados.sigma * gauss(rng);
  d.ados2 = static_cast<int>(std::clamp(std::lround(raw), 0L, 22L));
  return d;
}

/// Synthetic subject: channels of each hemisphere share a source mixed with private noise by the subject's
/// lambda; channels outside both hemisphere sets are independent.
inline Recording gen_subject(const CohortSpec& spec, std::size_t index) {
  const auto d = draw_subject(spec, index);
  const std::uint64_t seed = mix_seed(spec.seed, index);
  const auto left = ElectrodeSet::left_hemisphere().names;
  const auto right = ElectrodeSet::right_hemisphere().names;
  auto in = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };

  std::vector<double> left_source, right_source;
  Recording rec;
  rec.fs = spec.fs;
  rec.labels = spec.channels;
  char id[32];
  std::snprintf(id, sizeof(id), "sub-%02zu", index + 1);
  rec.subject_id = id;
  rec.diagnosis = d.diagnosis;
  rec.ados2_score = d.ados2;
  for (std::size_t c = 0; c < spec.channels.size(); ++c) {
    const auto& label = spec.channels[c];
    double lambda = 0.0;
    const std::vector<double>* source = nullptr;
    if (in(left, label)) {
      if (left_source.empty()) left_source = gen_band_signal(d.band_powers, spec.fs, spec.duration_s, mix_seed(seed, 1), spec.bands);
      lambda = d.left_lambda;
      source = &left_source;
    } else if (in(right, label)) {
      if (right_source.empty()) right_source = gen_band_signal(d.band_powers, spec.fs, spec.duration_s, mix_seed(seed, 2), spec.bands);
      lambda = d.right_lambda;
      source = &right_source;
    }
    auto x = gen_band_signal(d.band_powers, spec.fs, spec.duration_s, mix_seed(seed, 100 + c), spec.bands);
    if (source) {
      const double norm = 1.0 / std::sqrt(lambda * lambda + (1.0 - lambda) * (1.0 - lambda));
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = norm * (lambda * (*source)[i] + (1.0 - lambda) * x[i]);
    }
    rec.data.push_back(std::move(x));
  }
  const auto n = rec.samples();
  const auto baseline = static_cast<std::size_t>(std::llround(spec.baseline_s * spec.fs));
  if (baseline > 0) rec.epochs.push_back({"BASELINE", 0, baseline});
  rec.epochs.push_back({"TASK1", baseline, n});
  check_invariants(rec);
  return rec;
}

/// ASD subjects first, then TD; deterministic for a given spec.
inline std::vector<Recording> gen_cohort(const CohortSpec& spec) {
  spec.check();
  std::vector<Recording> out;
  for (std::size_t i = 0; i < spec.n_asd + spec.n_td; ++i) out.push_back(gen_subject(spec, i));
  return out;
}

/// Writes `<subject_id>.json` + `.csv` per recording; returns the manifest paths.
inline std::vector<std::filesystem::path> write_cohort(const std::vector<Recording>& cohort,
                                                       const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& rec : cohort) out.push_back(save_recording(rec, dir / (rec.subject_id + ".json")));
  return out;
}

}  // namespace eegkit::synth
