#pragma once

#include <cmath>
#include <cstddef>

#include "mcse/error.hpp"
#include "mcse/linalg.hpp"
#include "mcse/noise.hpp"
#include "mcse/rng.hpp"

namespace mcse {

struct Gaussian2 {
  Vec2 mean{};
  Sym2 cov{1.0, 0.0, 1.0};
};

inline Gaussian2 zero_mean(const ExecutionSkillParams& p) { return {{}, covariance(p)}; }

// KL(P || Q) in nats for bivariate normals.
inline double kl_bivariate(const Gaussian2& p, const Gaussian2& q) {
  if (!p.cov.is_spd() || !q.cov.is_spd()) throw InvalidParameter("KL divergence needs SPD covariances");
  const Sym2 q_inv = q.cov.inverse();
  const Vec2 d = q.mean - p.mean;
  const double value =
      0.5 * (trace_product(q_inv, p.cov) + q_inv.quad(d) - 2.0 + std::log(q.cov.det() / p.cov.det()));
  return value < 0.0 ? 0.0 : value;
}

// Jeffreys divergence: KL(P || Q) + KL(Q || P).
inline double jeffreys(const Gaussian2& p, const Gaussian2& q) { return kl_bivariate(p, q) + kl_bivariate(q, p); }

inline double jeffreys(const ExecutionSkillParams& truth, const ExecutionSkillParams& estimate) {
  return jeffreys(zero_mean(truth), zero_mean(estimate));
}

inline double generalized_variance(const Sym2& cov) {
  if (!cov.is_spd()) throw InvalidParameter("generalized variance needs an SPD covariance");
  return cov.det();
}

// Axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi].
struct Rect {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;

  bool contains(Vec2 p) const { return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi; }
  Vec2 center() const { return {0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)}; }
};

struct ProbabilityEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t kStrikeZoneSamples = 1'000'000;

// Monte Carlo probability that aim + N(0, cov) lands inside `zone`.
inline ProbabilityEstimate strike_zone_probability(const Sym2& cov, Vec2 aim, const Rect& zone, std::size_t n_samples,
                                                   RngStream& rng) {
  if (n_samples < 1) throw InvalidParameter("need at least one sample");
  const BivariateNormal noise(cov);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n_samples; ++i)
    if (zone.contains(aim + noise.transform(rng.normal2()))) ++inside;
  const double p = static_cast<double>(inside) / static_cast<double>(n_samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples)), n_samples};
}

}  // namespace mcse
