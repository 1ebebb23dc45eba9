#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "eegkit/error.hpp"

namespace eegkit {

struct BandSpec {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const BandSpec&) const = default;
};

/// delta, theta, alpha, beta, gamma edges in Hz.
inline std::vector<BandSpec> default_bands() {
  return {{"delta", 0.1, 4.0}, {"theta", 4.0, 7.5}, {"alpha", 7.5, 12.0}, {"beta", 12.0, 30.0}, {"gamma", 30.0, 100.0}};
}

enum class FilterKind { lowpass, highpass, bandpass, bandstop };

/// Direct-form-II-transposed biquad with a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  bool stable() const noexcept {
    // Jury conditions for z^2 + a1 z + a2.
    return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
  }
};

struct FilterCoefficients {
  FilterKind kind = FilterKind::lowpass;
  int order = 0;
  std::vector<double> cutoffs_hz;
  double fs = 0.0;

  std::vector<std::complex<double>> zeros;
  std::vector<std::complex<double>> poles;
  double gain = 1.0;

  /// Cascade used for filtering; poles are the same as `poles`.
  std::vector<Biquad> sections;

  /// Number of poles of the digital filter.
  std::size_t degree() const noexcept { return poles.size(); }

  /// Expanded transfer function numerator. Poorly conditioned for narrow bands; use `sections` to filter.
  std::vector<double> numerator() const { return expand(zeros, gain); }
  /// Expanded denominator; leading coefficient is 1.
  std::vector<double> denominator() const { return expand(poles, 1.0); }

  std::complex<double> response(double f_hz) const {
    const auto z = std::polar(1.0, 2.0 * std::numbers::pi * f_hz / fs);
    std::complex<double> h = gain;
    for (const auto& q : zeros) h *= z - q;
    for (const auto& p : poles) h /= z - p;
    return h;
  }

  double magnitude(double f_hz) const { return std::abs(response(f_hz)); }

  double max_pole_radius() const {
    double r = 0.0;
    for (const auto& p : poles) r = std::max(r, std::abs(p));
    return r;
  }

 private:
  static std::vector<double> expand(const std::vector<std::complex<double>>& roots, double scale) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& r : roots) {
      c.push_back(0.0);
      for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
    }
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = scale * c[i].real();
    return out;
  }
};

namespace detail {

using cplx = std::complex<double>;

struct Zpk {
  std::vector<cplx> z, p;
  double k = 1.0;
};

inline Zpk butter_prototype(int n) {
  Zpk f;
  for (int m = -n + 1; m < n; m += 2)
    f.p.push_back(-std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * n))));
  return f;
}

inline cplx prod_neg(const std::vector<cplx>& v) {
  cplx r = 1.0;
  for (const auto& x : v) r *= -x;
  return r;
}

inline Zpk lp2lp(Zpk f, double wo) {
  const auto degree = static_cast<int>(f.p.size() - f.z.size());
  for (auto& z : f.z) z *= wo;
  for (auto& p : f.p) p *= wo;
  f.k *= std::pow(wo, degree);
  return f;
}

inline Zpk lp2hp(const Zpk& f, double wo) {
  const auto degree = f.p.size() - f.z.size();
  Zpk out;
  for (const auto& z : f.z) out.z.push_back(wo / z);
  for (const auto& p : f.p) out.p.push_back(wo / p);
  out.z.insert(out.z.end(), degree, cplx(0.0));
  out.k = f.k * (prod_neg(f.z) / prod_neg(f.p)).real();
  return out;
}

inline Zpk lp2bp(const Zpk& f, double wo, double bw) {
  const auto degree = f.p.size() - f.z.size();
  Zpk out;
  auto split = [&](const std::vector<cplx>& roots, std::vector<cplx>& dst) {
    for (const auto& r : roots) {
      const cplx s = r * bw / 2.0;
      const cplx d = std::sqrt(s * s - wo * wo);
      dst.push_back(s + d);
      dst.push_back(s - d);
    }
  };
  split(f.z, out.z);
  split(f.p, out.p);
  out.z.insert(out.z.end(), degree, cplx(0.0));
  out.k = f.k * std::pow(bw, static_cast<double>(degree));
  return out;
}

inline Zpk lp2bs(const Zpk& f, double wo, double bw) {
  const auto degree = f.p.size() - f.z.size();
  Zpk out;
  auto split = [&](const std::vector<cplx>& roots, std::vector<cplx>& dst) {
    for (const auto& r : roots) {
      const cplx s = (bw / 2.0) / r;
      const cplx d = std::sqrt(s * s - wo * wo);
      dst.push_back(s + d);
      dst.push_back(s - d);
    }
  };
  split(f.z, out.z);
  split(f.p, out.p);
  for (std::size_t i = 0; i < degree; ++i) {
    out.z.emplace_back(0.0, wo);
    out.z.emplace_back(0.0, -wo);
  }
  out.k = f.k * (prod_neg(f.z) / prod_neg(f.p)).real();
  return out;
}

inline Zpk bilinear(const Zpk& f, double fs) {
  const double fs2 = 2.0 * fs;
  const auto degree = f.p.size() - f.z.size();
  Zpk out;
  cplx num = 1.0, den = 1.0;
  for (const auto& z : f.z) {
    out.z.push_back((fs2 + z) / (fs2 - z));
    num *= fs2 - z;
  }
  for (const auto& p : f.p) {
    out.p.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  out.z.insert(out.z.end(), degree, cplx(-1.0));
  out.k = f.k * (num / den).real();
  return out;
}

// Splits roots into conjugate pairs followed by leftover reals (paired first-with-last after sorting,
// so +1 and -1 zeros of a bandpass land in the same section).
inline std::vector<std::vector<cplx>> group_roots(std::vector<cplx> roots) {
  const double tol = 1e-10;
  std::vector<std::vector<cplx>> groups;
  std::vector<double> reals;
  std::vector<cplx> upper;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) <= tol * std::max(1.0, std::abs(r)))
      reals.push_back(r.real());
    else if (r.imag() > 0)
      upper.push_back(r);
  }
  for (const auto& r : upper) groups.push_back({r, std::conj(r)});
  std::sort(reals.begin(), reals.end());
  std::size_t lo = 0, hi = reals.size();
  while (hi - lo >= 2) {
    groups.push_back({reals[lo], reals[hi - 1]});
    ++lo;
    --hi;
  }
  if (hi - lo == 1) groups.push_back({reals[lo]});
  return groups;
}

inline std::vector<Biquad> zpk_to_sections(const Zpk& f) {
  auto pg = group_roots(f.p);
  auto zg = group_roots(f.z);
  // Put a lone first-order pole group last so it meets the lone zero.
  std::stable_partition(pg.begin(), pg.end(), [](const auto& g) { return g.size() == 2; });
  std::stable_partition(zg.begin(), zg.end(), [](const auto& g) { return g.size() == 2; });
  if (pg.size() != zg.size()) throw Error("filter design: cannot pair zeros with poles");

  std::vector<Biquad> out;
  for (std::size_t i = 0; i < pg.size(); ++i) {
    Biquad s;
    auto coeffs = [](const std::vector<cplx>& g, double& c1, double& c2) {
      if (g.size() == 2) {
        c1 = -(g[0] + g[1]).real();
        c2 = (g[0] * g[1]).real();
      } else {
        c1 = -g[0].real();
        c2 = 0.0;
      }
    };
    double z1 = 0, z2 = 0;
    coeffs(zg[i], z1, z2);
    coeffs(pg[i], s.a1, s.a2);
    const double k = i == 0 ? f.k : 1.0;
    s.b0 = k;
    s.b1 = k * z1;
    s.b2 = k * z2;
    out.push_back(s);
  }
  return out;
}

inline const char* kind_name(FilterKind k) {
  switch (k) {
    case FilterKind::lowpass: return "lowpass";
    case FilterKind::highpass: return "highpass";
    case FilterKind::bandpass: return "bandpass";
    case FilterKind::bandstop: return "bandstop";
  }
  return "?";
}

}  // namespace detail

/// Digital Butterworth filter: analog prototype with epsilon = 1, bilinear transform with pre-warped edges.
/// Band filters have 2n poles.
inline FilterCoefficients design_butterworth(FilterKind kind, std::vector<double> cutoffs_hz, int order, double fs) {
  if (order < 1) throw Error("design_butterworth: order must be >= 1");
  if (!(fs > 0.0)) throw Error("design_butterworth: sampling rate must be positive");
  const bool band = kind == FilterKind::bandpass || kind == FilterKind::bandstop;
  if (cutoffs_hz.size() != (band ? 2u : 1u))
    throw Error(std::string("design_butterworth: ") + detail::kind_name(kind) + " needs " + (band ? "2" : "1") +
                " cutoff(s)");
  const double nyquist = fs / 2.0;
  for (double c : cutoffs_hz)
    if (!(c > 0.0) || c >= nyquist)
      throw Error("design_butterworth: cutoff " + std::to_string(c) + " Hz outside (0, " + std::to_string(nyquist) +
                  ") Hz");
  if (band && !(cutoffs_hz[0] < cutoffs_hz[1])) throw Error("design_butterworth: band cutoffs must be increasing");

  auto warp = [fs](double f) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); };
  auto proto = detail::butter_prototype(order);
  detail::Zpk analog;
  switch (kind) {
    case FilterKind::lowpass: analog = detail::lp2lp(proto, warp(cutoffs_hz[0])); break;
    case FilterKind::highpass: analog = detail::lp2hp(proto, warp(cutoffs_hz[0])); break;
    case FilterKind::bandpass:
    case FilterKind::bandstop: {
      const double w1 = warp(cutoffs_hz[0]);
      const double w2 = warp(cutoffs_hz[1]);
      const double wo = std::sqrt(w1 * w2);
      analog = kind == FilterKind::bandpass ? detail::lp2bp(proto, wo, w2 - w1) : detail::lp2bs(proto, wo, w2 - w1);
      break;
    }
  }
  const auto digital = detail::bilinear(analog, fs);

  FilterCoefficients f;
  f.kind = kind;
  f.order = order;
  f.cutoffs_hz = std::move(cutoffs_hz);
  f.fs = fs;
  f.zeros = digital.z;
  f.poles = digital.p;
  f.gain = digital.k;
  f.sections = detail::zpk_to_sections(digital);
  if (!(f.max_pole_radius() < 1.0)) throw Error("design_butterworth: designed filter is unstable");
  for (const auto& s : f.sections)
    if (!s.stable()) throw Error("design_butterworth: unstable section");
  return f;
}

namespace detail {

// Steady-state section states for a unit step at the cascade input.
inline std::vector<std::array<double, 2>> step_initial_state(const std::vector<Biquad>& sections) {
  std::vector<std::array<double, 2>> zi(sections.size());
  double scale = 1.0;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& s = sections[i];
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double z2 = s.b2 - s.a2 * dc;
    const double z1 = s.b1 - s.a1 * dc + z2;
    zi[i] = {scale * z1, scale * z2};
    scale *= dc;
  }
  return zi;
}

inline void run_cascade(const std::vector<Biquad>& sections, std::vector<std::array<double, 2>> state,
                        std::vector<double>& x) {
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& s = sections[i];
    double z1 = state[i][0], z2 = state[i][1];
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

inline std::vector<std::array<double, 2>> scaled(std::vector<std::array<double, 2>> zi, double by) {
  for (auto& z : zi) {
    z[0] *= by;
    z[1] *= by;
  }
  return zi;
}

}  // namespace detail

/// Forward-backward filtering with odd-reflection padding and steady-state initial conditions.
/// Output has the input's length and an effective magnitude response of |H|^2 with zero phase.
inline std::vector<double> apply_zero_phase(const FilterCoefficients& f, std::span<const double> x) {
  for (const auto& s : f.sections)
    if (!s.stable()) throw Error("apply_zero_phase: unstable coefficients");
  const std::size_t n = x.size();
  const std::size_t need = 3 * f.degree();
  if (n <= need)
    throw Error("apply_zero_phase: series of " + std::to_string(n) + " samples is too short (need > " +
                std::to_string(need) + ")");

  const std::size_t pad = std::min(3 * (2 * f.sections.size() + 1), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = detail::step_initial_state(f.sections);
  detail::run_cascade(f.sections, detail::scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  detail::run_cascade(f.sections, detail::scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

inline constexpr int kDefaultFilterOrder = 5;

/// 1 Hz high-pass, order 5, zero-phase.
inline std::vector<double> remove_drift(std::span<const double> x, double fs, int order = kDefaultFilterOrder) {
  if (!(fs > 2.0)) throw Error("remove_drift: sampling rate must exceed 2 Hz");
  return apply_zero_phase(design_butterworth(FilterKind::highpass, {1.0}, order, fs), x);
}

/// Band-stop of +-1 Hz around the mains frequency, order 5, zero-phase.
inline std::vector<double> remove_line_noise(std::span<const double> x, double fs, double line_hz = 60.0,
                                             int order = kDefaultFilterOrder) {
  if (!(line_hz + 1.0 < fs / 2.0))
    throw Error("remove_line_noise: line frequency " + std::to_string(line_hz) + " Hz too close to Nyquist");
  return apply_zero_phase(design_butterworth(FilterKind::bandstop, {line_hz - 1.0, line_hz + 1.0}, order, fs), x);
}

/// `band` with its upper edge pulled below Nyquist when needed; `clipped` reports whether that happened.
inline BandSpec fit_band(const BandSpec& band, double fs, bool* clipped = nullptr) {
  BandSpec b = band;
  const double nyq = fs / 2.0;
  if (clipped) *clipped = false;
  if (b.hi >= nyq) {
    b.hi = 0.99 * nyq;
    if (clipped) *clipped = true;
  }
  if (!(b.lo >= 0.0) || !(b.lo < b.hi))
    throw Error("band '" + band.name + "' [" + std::to_string(band.lo) + ", " + std::to_string(band.hi) +
                ") is invalid at fs=" + std::to_string(fs));
  return b;
}

/// Band-pass (or low-pass when lo == 0) design used for decomposition.
inline FilterCoefficients design_band(const BandSpec& band, double fs, int order = kDefaultFilterOrder) {
  const auto b = fit_band(band, fs);
  if (b.lo == 0.0) return design_butterworth(FilterKind::lowpass, {b.hi}, order, fs);
  return design_butterworth(FilterKind::bandpass, {b.lo, b.hi}, order, fs);
}

struct BandSeries {
  BandSpec band;  // as applied (after clipping)
  std::vector<double> samples;
  /// Samples at each end likely dominated by the filter's start-up transient: 3 n fs / lo.
  std::size_t edge_transient = 0;
};

struct Decomposition {
  std::vector<BandSeries> bands;
  std::vector<std::string> warnings;
};

inline Decomposition band_decompose(std::span<const double> x, double fs,
                                    const std::vector<BandSpec>& bands = default_bands(),
                                    int order = kDefaultFilterOrder) {
  if (bands.empty()) throw Error("band_decompose: empty band list");
  Decomposition out;
  for (const auto& band : bands) {
    bool clipped = false;
    const auto applied = fit_band(band, fs, &clipped);
    if (clipped)
      out.warnings.push_back("band '" + band.name + "' upper edge clipped to " + std::to_string(applied.hi) + " Hz");
    BandSeries s;
    s.band = applied;
    s.samples = apply_zero_phase(design_band(applied, fs, order), x);
    const double lo = applied.lo > 0.0 ? applied.lo : applied.hi;
    s.edge_transient = std::min(x.size(), static_cast<std::size_t>(std::ceil(3.0 * order * fs / lo)));
    out.bands.push_back(std::move(s));
  }
  return out;
}

}  // namespace eegkit
