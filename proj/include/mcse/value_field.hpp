#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "mcse/fft.hpp"
#include "mcse/grid.hpp"
#include "mcse/noise.hpp"

namespace mcse {

// Expected reward V(t) = E[R(t + e)] of aiming at every grid cell t under
// execution noise e ~ N(0, cov(params)).
struct ValueField {
  std::int64_t state_key = 0;
  ExecutionSkillParams params{};
  ActionGrid grid{};
  std::vector<double> values;
  double max_value = 0.0;
  std::size_t argmax_cell = 0;
};

// Values within this relative distance of the maximum count as ties; the
// lowest such index wins. Absorbs FFT rounding between symmetric maximizers.
inline constexpr double kArgmaxTieTolerance = 1e-12;

inline void finalize_field(ValueField& f, double lo, double hi) {
  double best = -INFINITY;
  for (double& v : f.values) {
    v = std::clamp(v, lo, hi);
    best = std::max(best, v);
  }
  const double cutoff = best - kArgmaxTieTolerance * std::max(1.0, std::abs(best));
  f.max_value = best;
  f.argmax_cell = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (f.values[i] >= cutoff) {
      f.argmax_cell = i;
      break;
    }
  }
}

inline Vec2 optimal_action(const ValueField& field) { return field.grid.cell(field.argmax_cell); }

// Computes value fields on one action grid by zero-padded frequency-domain
// correlation of the reward grid with the discretized noise kernel.
//
// The transform size n satisfies n >= 2 * side, so kernel offsets never wrap
// onto each other. The transform of each reward grid is cached by state key;
// the cache tolerates concurrent readers with a single writer at a time.
class ValueFieldEngine {
 public:
  explicit ValueFieldEngine(ActionGrid grid, std::size_t cache_capacity = 512)
      : grid_(grid),
        fft_(fft::good_size(2 * grid.side())),
        cache_capacity_(cache_capacity) {}

  const ActionGrid& grid() const { return grid_; }
  int fft_size() const { return fft_.n(); }

  ValueField compute(const RewardGrid& reward, const ExecutionSkillParams& params) const {
    const Kernel kernel = discretized_kernel(params, grid_.resolution(), grid_.side() - 1);
    ValueField f = compute(reward, kernel);
    f.params = params;
    return f;
  }

  ValueField compute(const RewardGrid& reward, const Kernel& kernel) const {
    check_reward(reward);
    if (kernel.resolution != grid_.resolution()) throw InvalidParameter("kernel and reward resolutions differ");
    const auto spectrum = reward_spectrum(reward);
    auto ws = acquire();
    const int n = fft_.n();
    const int side = grid_.side();

    // Correlation: place k(d) at index -d (mod n) and multiply spectra.
    double* kr = ws->real.get();
    std::fill(kr, kr + fft_.real_size(), 0.0);
    const int bx = std::min(kernel.half_x, side - 1);
    const int by = std::min(kernel.half_y, side - 1);
    for (int dy = -by; dy <= by; ++dy) {
      const std::size_t row = static_cast<std::size_t>((n - dy) % n) * n;
      for (int dx = -bx; dx <= bx; ++dx) kr[row + static_cast<std::size_t>((n - dx) % n)] = kernel.at(dx, dy);
    }
    fft_.forward(kr, ws->spec.get());
    const fftw_complex* rs = spectrum->data.get();
    fftw_complex* out = ws->spec.get();
    for (std::size_t i = 0; i < fft_.complex_size(); ++i) {
      const double re = rs[i][0] * out[i][0] - rs[i][1] * out[i][1];
      const double im = rs[i][0] * out[i][1] + rs[i][1] * out[i][0];
      out[i][0] = re;
      out[i][1] = im;
    }
    fft_.inverse(out, ws->real.get());

    ValueField f;
    f.state_key = reward.key;
    f.grid = grid_;
    f.values.resize(grid_.size());
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        f.values[grid_.index(r, c)] = ws->real[static_cast<std::size_t>(r) * n + c] * scale;
    release(std::move(ws));
    finalize_field(f, spectrum->min_reward, spectrum->max_reward);
    return f;
  }

  std::size_t cached_states() const {
    std::shared_lock lock(cache_mutex_);
    return cache_.size();
  }

 private:
  struct Spectrum {
    fft::Buffer<fftw_complex> data;
    std::uint64_t fingerprint = 0;
    double min_reward = 0.0;
    double max_reward = 0.0;
  };
  struct Workspace {
    fft::Buffer<double> real;
    fft::Buffer<fftw_complex> spec;
  };

  void check_reward(const RewardGrid& reward) const {
    if (!reward.grid.same_lattice(grid_)) throw InvalidParameter("reward grid does not match the engine's action grid");
  }

  std::shared_ptr<const Spectrum> reward_spectrum(const RewardGrid& reward) const {
    {
      std::shared_lock lock(cache_mutex_);
      auto it = cache_.find(reward.key);
      if (it != cache_.end() && it->second->fingerprint == reward.fingerprint) return it->second;
    }
    auto s = std::make_shared<Spectrum>();
    s->data = fft::allocate<fftw_complex>(fft_.complex_size());
    s->fingerprint = reward.fingerprint;
    // Zero padding outside the grid: the reward there is zero.
    s->min_reward = std::min(0.0, reward.min());
    s->max_reward = std::max(0.0, reward.max());
    auto real = fft::allocate<double>(fft_.real_size());
    std::fill(real.get(), real.get() + fft_.real_size(), 0.0);
    const int n = fft_.n();
    for (int r = 0; r < grid_.side(); ++r)
      for (int c = 0; c < grid_.side(); ++c)
        real[static_cast<std::size_t>(r) * n + c] = reward.values[grid_.index(r, c)];
    fft_.forward(real.get(), s->data.get());
    std::unique_lock lock(cache_mutex_);
    if (cache_.size() >= cache_capacity_) cache_.clear();
    cache_[reward.key] = s;
    return s;
  }

  std::unique_ptr<Workspace> acquire() const {
    {
      std::lock_guard lock(pool_mutex_);
      if (!pool_.empty()) {
        auto ws = std::move(pool_.back());
        pool_.pop_back();
        return ws;
      }
    }
    auto ws = std::make_unique<Workspace>();
    ws->real = fft::allocate<double>(fft_.real_size());
    ws->spec = fft::allocate<fftw_complex>(fft_.complex_size());
    return ws;
  }
  void release(std::unique_ptr<Workspace> ws) const {
    std::lock_guard lock(pool_mutex_);
    pool_.push_back(std::move(ws));
  }

  ActionGrid grid_;
  fft::RealFft2d fft_;
  std::size_t cache_capacity_;
  mutable std::shared_mutex cache_mutex_;
  mutable std::unordered_map<std::int64_t, std::shared_ptr<const Spectrum>> cache_;
  mutable std::mutex pool_mutex_;
  mutable std::vector<std::unique_ptr<Workspace>> pool_;
};

// Convenience entry point without caching.
inline ValueField compute_value_field(const RewardGrid& reward, const ExecutionSkillParams& params) {
  ValueFieldEngine engine(reward.grid, 1);
  return engine.compute(reward, params);
}

}  // namespace mcse
