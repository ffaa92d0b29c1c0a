#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "mcse/error.hpp"

namespace mcse::fft {

// Planning in FFTW is not thread-safe; execution with the new-array API is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using Buffer = std::unique_ptr<T[], FftwFree>;

template <class T>
Buffer<T> allocate(std::size_t count) {
  auto* raw = static_cast<T*>(fftw_malloc(sizeof(T) * count));
  if (raw == nullptr) throw std::bad_alloc();
  return Buffer<T>(raw);
}

// Smallest even n' >= n whose only prime factors are 2, 3 and 5.
inline int good_size(int n) {
  for (int m = std::max(n, 2);; ++m) {
    if (m % 2 != 0) continue;
    int r = m;
    for (int f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

// Square real-to-complex 2-D transform pair of side n. Plans use
// FFTW_ESTIMATE so the chosen algorithm (and therefore every rounding) is
// identical from run to run.
class RealFft2d {
 public:
  explicit RealFft2d(int n) : n_(n) {
    if (n < 1) throw InvalidParameter("FFT size must be positive");
    auto real = allocate<double>(real_size());
    auto spec = allocate<fftw_complex>(complex_size());
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_2d(n, n, real.get(), spec.get(), FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_2d(n, n, spec.get(), real.get(), FFTW_ESTIMATE);
    if (forward_ == nullptr || inverse_ == nullptr) throw Error("FFTW planning failed");
  }
  RealFft2d(const RealFft2d&) = delete;
  RealFft2d& operator=(const RealFft2d&) = delete;
  ~RealFft2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  int n() const { return n_; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }
  std::size_t complex_size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ / 2 + 1); }

  // Buffers must come from allocate<>() so their alignment matches the plan.
  void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_, in, out); }
  // Unnormalized; destroys `in`.
  void inverse(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(inverse_, in, out); }

 private:
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace mcse::fft
