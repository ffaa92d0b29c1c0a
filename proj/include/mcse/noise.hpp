#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mcse/error.hpp"
#include "mcse/linalg.hpp"
#include "mcse/rng.hpp"

namespace mcse {

// Zero-mean bivariate Gaussian execution noise, parameterized by the two
// marginal standard deviations and their correlation.
struct ExecutionSkillParams {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double rho = 0.0;

  void validate() const {
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !std::isfinite(sigma_x) || !std::isfinite(sigma_y))
      throw InvalidParameter("execution skill standard deviations must be positive and finite");
    if (!(std::abs(rho) < 1.0)) throw InvalidParameter("execution skill correlation must lie in (-1, 1)");
  }

  friend bool operator==(const ExecutionSkillParams&, const ExecutionSkillParams&) = default;
};

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  double clamp(double v) const { return std::clamp(v, lo, hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct SkillRanges {
  Range sigma{3.0, 150.5};
  Range rho{-0.75, 0.75};
  Range lambda{0.001, 32.0};

  void validate() const {
    if (!(sigma.lo < sigma.hi) || !(rho.lo < rho.hi) || !(lambda.lo < lambda.hi))
      throw InvalidParameter("every skill range needs lo < hi");
    if (!(sigma.lo > 0.0)) throw InvalidParameter("sigma range must be positive");
    if (!(rho.lo > -1.0) || !(rho.hi < 1.0)) throw InvalidParameter("rho range must lie inside (-1, 1)");
    if (!(lambda.lo >= 0.0)) throw InvalidParameter("lambda range must be non-negative");
  }
};

inline Sym2 covariance(const ExecutionSkillParams& p) {
  p.validate();
  return {p.sigma_x * p.sigma_x, p.sigma_x * p.sigma_y * p.rho, p.sigma_y * p.sigma_y};
}

// Density, log-density and sampling for N(0, cov). Precomputes the precision
// matrix, the normalizer and the Cholesky factor.
class BivariateNormal {
 public:
  explicit BivariateNormal(const Sym2& cov)
      : cov_(cov), chol_(cholesky(cov)), precision_(cov.inverse()),
        log_norm_(-std::log(2.0 * std::numbers::pi) - 0.5 * std::log(cov.det())) {}
  explicit BivariateNormal(const ExecutionSkillParams& p) : BivariateNormal(covariance(p)) {}

  const Sym2& cov() const { return cov_; }
  const Sym2& precision() const { return precision_; }
  double log_norm() const { return log_norm_; }

  double log_density(Vec2 offset) const { return log_norm_ - 0.5 * precision_.quad(offset); }
  double density(Vec2 offset) const { return std::exp(log_density(offset)); }

  // Maps a pair of independent standard normals to a draw from N(0, cov).
  Vec2 transform(Vec2 z) const { return chol_.apply(z); }

 private:
  Sym2 cov_;
  Cholesky2 chol_;
  Sym2 precision_;
  double log_norm_;
};

inline double pdf(const ExecutionSkillParams& p, Vec2 offset) { return BivariateNormal(p).density(offset); }

inline Vec2 sample(const ExecutionSkillParams& p, RngStream& rng) {
  const Vec2 z = rng.normal2();
  return BivariateNormal(p).transform(z);
}

// Discretized noise kernel on a lattice of the given resolution, indexed by
// integer cell offsets (dx, dy) in [-half_x, half_x] x [-half_y, half_y].
struct Kernel {
  double resolution = 1.0;
  int half_x = 0;
  int half_y = 0;
  std::vector<double> weights;
  // True when support was cut at the caller's bound; the stored mass is then
  // below one by whatever fell outside.
  bool clipped = false;
  bool subsampled = false;

  int width() const { return 2 * half_x + 1; }
  int height() const { return 2 * half_y + 1; }
  double at(int dx, int dy) const {
    if (std::abs(dx) > half_x || std::abs(dy) > half_y) return 0.0;
    return weights[static_cast<std::size_t>((dy + half_y) * width() + (dx + half_x))];
  }
  double total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

inline constexpr double kKernelTruncation = 5.0;
inline constexpr int kKernelSubsamples = 5;

namespace detail {

// Fills out[k - lo] = exp(a k^2 + b k + c) for k in [lo, hi] by walking
// outward from the peak with multiplicative ratios (a < 0).
inline void gaussian_span(double a, double b, double c, int lo, int hi, double* out) {
  if (hi < lo) return;
  int start = lo;
  if (a < 0.0) {
    const double peak = -b / (2.0 * a);
    start = static_cast<int>(std::clamp(std::lround(peak), static_cast<long>(lo), static_cast<long>(hi)));
  }
  const double step = std::exp(2.0 * a);
  const double e0 = std::exp(a * start * start + b * start + c);
  out[start - lo] = e0;
  double value = e0;
  double ratio = std::exp(a * (2.0 * start + 1.0) + b);
  for (int k = start + 1; k <= hi; ++k) {
    value *= ratio;
    ratio *= step;
    out[k - lo] = value;
  }
  value = e0;
  ratio = std::exp(a * (-2.0 * start + 1.0) - b);
  for (int k = start - 1; k >= lo; --k) {
    value *= ratio;
    ratio *= step;
    out[k - lo] = value;
  }
}

// x-interval where |axis . (x, y)| <= limit; empty when lo > hi.
inline void clip_interval(Vec2 axis, double y, double limit, double& lo, double& hi) {
  const double c = axis.y * y;
  if (std::abs(axis.x) < 1e-300) {
    if (std::abs(c) > limit) {
      lo = 1.0;
      hi = -1.0;
    }
    return;
  }
  double a = (-limit - c) / axis.x;
  double b = (limit - c) / axis.x;
  if (a > b) std::swap(a, b);
  lo = std::max(lo, a);
  hi = std::min(hi, b);
}

}  // namespace detail

// Samples the pdf at cell centers times the cell area over the rectangle
// spanning +-5 standard deviations along each principal axis, then
// renormalizes to unit mass. When the minor principal deviation is below the
// resolution each cell integrates a 5x5 sub-lattice instead. `max_half_cells`
// bounds the stored support; mass beyond it is dropped after normalization.
// The result satisfies k(-dx, -dy) == k(dx, dy) exactly.
inline Kernel discretized_kernel(const ExecutionSkillParams& p, double resolution, int max_half_cells = INT_MAX) {
  if (!(resolution > 0.0)) throw InvalidParameter("kernel resolution must be positive");
  const BivariateNormal noise(p);
  const SymEigen2 eig = eigen(noise.cov());
  const double sd_major = std::sqrt(eig.major);
  const double sd_minor = std::sqrt(std::max(eig.minor, 0.0));
  const double reach_x = kKernelTruncation * (sd_major * std::abs(eig.major_axis.x) + sd_minor * std::abs(eig.minor_axis.x));
  const double reach_y = kKernelTruncation * (sd_major * std::abs(eig.major_axis.y) + sd_minor * std::abs(eig.minor_axis.y));
  const int full_x = static_cast<int>(std::ceil(reach_x / resolution + 0.5));
  const int full_y = static_cast<int>(std::ceil(reach_y / resolution + 0.5));

  Kernel k;
  k.resolution = resolution;
  k.half_x = std::min(full_x, max_half_cells);
  k.half_y = std::min(full_y, max_half_cells);
  k.clipped = k.half_x < full_x || k.half_y < full_y;
  k.subsampled = sd_minor < resolution;
  const int width = k.width();
  k.weights.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(k.height()), 0.0);
  auto cell = [&](int dx, int dy) -> double& {
    return k.weights[static_cast<std::size_t>((dy + k.half_y) * width + (dx + k.half_x))];
  };

  const double limit_major = kKernelTruncation * sd_major;
  const double limit_minor = kKernelTruncation * sd_minor;
  const Sym2& prec = noise.precision();
  const double norm = std::exp(noise.log_norm());
  const int subs = k.subsampled ? kKernelSubsamples : 1;
  const int mid = subs / 2;
  const double step = resolution / subs;
  const double weight = norm * step * step;
  const double a = -0.5 * step * step * prec.xx;
  std::vector<double> row;

  // Rows dy >= 0; the lower half follows from central symmetry.
  for (int dy = 0; dy <= k.half_y; ++dy) {
    for (int sy = 0; sy < subs; ++sy) {
      const int jy = dy * subs + (sy - mid);
      const double y = jy * step;
      double lo = -INFINITY;
      double hi = INFINITY;
      detail::clip_interval(eig.major_axis, y, limit_major, lo, hi);
      detail::clip_interval(eig.minor_axis, y, limit_minor, lo, hi);
      if (!(lo <= hi)) continue;
      const int j_bound = k.half_x * subs + mid;
      const int j_lo = std::max(static_cast<int>(std::ceil(lo / step)), -j_bound);
      const int j_hi = std::min(static_cast<int>(std::floor(hi / step)), j_bound);
      if (j_lo > j_hi) continue;
      row.resize(static_cast<std::size_t>(j_hi - j_lo + 1));
      const double b = -step * step * prec.xy * jy;
      const double c = -0.5 * step * step * prec.yy * jy * jy;
      detail::gaussian_span(a, b, c, j_lo, j_hi, row.data());
      for (int j = j_lo; j <= j_hi; ++j) {
        const int dx = subs == 1 ? j : static_cast<int>(std::floor((j + mid) / static_cast<double>(subs)));
        if (dx < -k.half_x || dx > k.half_x) continue;
        cell(dx, dy) += row[static_cast<std::size_t>(j - j_lo)] * weight;
      }
    }
  }
  for (int dx = 1; dx <= k.half_x; ++dx) {
    const double v = 0.5 * (cell(dx, 0) + cell(-dx, 0));
    cell(dx, 0) = v;
    cell(-dx, 0) = v;
  }
  for (int dy = 1; dy <= k.half_y; ++dy)
    for (int dx = -k.half_x; dx <= k.half_x; ++dx) cell(-dx, -dy) = cell(dx, dy);

  double mass = 0.0;
  if (k.clipped) {
    const double axis_mass = std::erf(kKernelTruncation / std::numbers::sqrt2);
    mass = axis_mass * axis_mass;
  } else {
    mass = k.total();
  }
  if (!(mass > 0.0)) throw InvalidParameter("noise kernel has no mass on the lattice");
  for (double& w : k.weights) w /= mass;
  return k;
}

}  // namespace mcse
