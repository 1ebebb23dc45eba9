#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "eegkit/error.hpp"

namespace eegkit::fft {

using cplx = std::complex<double>;

namespace detail {

// FFTW's planner is not reentrant; execution is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  T* data;
};

}  // namespace detail

/// Reusable complex-to-complex transform of a fixed length. Unnormalized in both directions.
class ComplexPlan {
 public:
  ComplexPlan(std::size_t n, bool inverse) : n_(n), in_(n), out_(n) {
    if (n == 0) throw Error("fft: zero-length transform");
    std::lock_guard lock(detail::planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_.data, out_.data,
                             inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    if (!plan_) throw Error("fft: planner failed");
  }
  ~ComplexPlan() {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(plan_);
  }
  ComplexPlan(const ComplexPlan&) = delete;
  ComplexPlan& operator=(const ComplexPlan&) = delete;

  std::size_t size() const noexcept { return n_; }

  void execute(std::span<const cplx> in, std::span<cplx> out) {
    if (in.size() != n_ || out.size() != n_) throw Error("fft: buffer size mismatch");
    std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(in_.data));
    fftw_execute(plan_);
    const auto* res = reinterpret_cast<const cplx*>(out_.data);
    std::copy(res, res + n_, out.begin());
  }

 private:
  std::size_t n_;
  detail::FftwBuffer<fftw_complex> in_;
  detail::FftwBuffer<fftw_complex> out_;
  fftw_plan plan_ = nullptr;
};

/// Reusable real-to-half-complex forward transform; output has n/2 + 1 bins.
class RealPlan {
 public:
  explicit RealPlan(std::size_t n) : n_(n), in_(n), out_(n / 2 + 1) {
    if (n == 0) throw Error("fft: zero-length transform");
    std::lock_guard lock(detail::planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.data, out_.data, FFTW_ESTIMATE);
    if (!plan_) throw Error("fft: planner failed");
  }
  ~RealPlan() {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealPlan(const RealPlan&) = delete;
  RealPlan& operator=(const RealPlan&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  void execute(std::span<const double> in, std::span<cplx> out) {
    if (in.size() != n_ || out.size() != bins()) throw Error("fft: buffer size mismatch");
    std::copy(in.begin(), in.end(), in_.data);
    fftw_execute(plan_);
    const auto* res = reinterpret_cast<const cplx*>(out_.data);
    std::copy(res, res + bins(), out.begin());
  }

 private:
  std::size_t n_;
  detail::FftwBuffer<double> in_;
  detail::FftwBuffer<fftw_complex> out_;
  fftw_plan plan_ = nullptr;
};

/// One-sided spectrum X[0..n/2] of a real series.
inline std::vector<cplx> rfft(std::span<const double> x) {
  RealPlan plan(x.size());
  std::vector<cplx> out(plan.bins());
  plan.execute(x, out);
  return out;
}

/// Full complex DFT; the inverse is scaled by 1/n.
inline std::vector<cplx> dft(std::span<const cplx> x, bool inverse = false) {
  ComplexPlan plan(x.size(), inverse);
  std::vector<cplx> out(x.size());
  plan.execute(x, out);
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : out) v *= scale;
  }
  return out;
}

/// Smallest length >= n whose only prime factors are 2, 3, 5 and 7.
inline std::size_t good_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace eegkit::fft
