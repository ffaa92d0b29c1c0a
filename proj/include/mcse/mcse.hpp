#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcse/error.hpp"
#include "mcse/likelihood.hpp"
#include "mcse/noise.hpp"
#include "mcse/parallel.hpp"
#include "mcse/rng.hpp"
#include "mcse/value_field.hpp"

namespace mcse {

enum class ResampleStrategy { Always, EffectiveThreshold };

// How the degeneracy measure compared against the threshold is formed.
//  RawSumFraction: (sum of particle weights) / M.
//  NormalizedEss:  (1 / sum of squared normalized weights) / M.
enum class NeffMode { RawSumFraction, NormalizedEss };

enum class LambdaPrior { Uniform, LogUniform };

struct FilterConfig {
  std::size_t particles = 1000;
  double resample_fraction = 0.9;
  double perturb_fraction = 0.005;
  ResampleStrategy strategy = ResampleStrategy::EffectiveThreshold;
  double neff_threshold = 0.5;
  NeffMode neff_mode = NeffMode::RawSumFraction;
  SkillRanges ranges{};
  LambdaPrior lambda_prior = LambdaPrior::Uniform;
  // Jitter every step; when false only after a resample.
  bool perturb_every_step = true;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const {
    if (particles < 2) throw InvalidParameter("particle filter needs at least 2 particles");
    if (!(resample_fraction > 0.0 && resample_fraction <= 1.0))
      throw InvalidParameter("resample fraction must lie in (0, 1]");
    if (!(perturb_fraction >= 0.0) || !std::isfinite(perturb_fraction))
      throw InvalidParameter("perturbation fraction must be >= 0");
    if (strategy == ResampleStrategy::EffectiveThreshold && !(neff_threshold > 0.0 && neff_threshold < 1.0))
      throw InvalidParameter("effective-count threshold must lie in (0, 1)");
    ranges.validate();
    if (lambda_prior == LambdaPrior::LogUniform && !(ranges.lambda.lo > 0.0))
      throw InvalidParameter("log-uniform lambda prior needs a positive lower bound");
  }
};

// One joint skill hypothesis. Weights are kept as logarithms: a hundred
// products of densities underflow a double.
struct Particle {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double rho = 0.0;
  double lambda = 1.0;
  double log_weight = 0.0;
  // Injected as a new random particle by the latest resample.
  bool fresh = false;

  double weight() const { return std::exp(log_weight); }
  ExecutionSkillParams skill() const { return {sigma_x, sigma_y, rho}; }
};

using ParticleSet = std::vector<Particle>;

struct SkillEstimate {
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double rho = 0.0;
  double lambda = 0.0;

  ExecutionSkillParams skill() const { return {sigma_x, sigma_y, rho}; }
  Sym2 covariance() const { return mcse::covariance(skill()); }
};

inline Particle random_particle(const FilterConfig& config, RngStream& rng) {
  const SkillRanges& r = config.ranges;
  Particle p;
  p.sigma_x = rng.uniform(r.sigma.lo, r.sigma.hi);
  p.sigma_y = rng.uniform(r.sigma.lo, r.sigma.hi);
  p.rho = rng.uniform(r.rho.lo, r.rho.hi);
  if (config.lambda_prior == LambdaPrior::LogUniform)
    p.lambda = std::exp(rng.uniform(std::log(r.lambda.lo), std::log(r.lambda.hi)));
  else
    p.lambda = rng.uniform(r.lambda.lo, r.lambda.hi);
  return p;
}

inline ParticleSet init_particles(const FilterConfig& config, RngStream& rng) {
  config.validate();
  ParticleSet out(config.particles);
  for (auto& p : out) p = random_particle(config, rng);
  return out;
}

namespace detail {

inline double max_log_weight(std::span<const Particle> ps) {
  double m = -INFINITY;
  for (const auto& p : ps) m = std::max(m, p.log_weight);
  return m;
}

}  // namespace detail

inline double effective_count(std::span<const Particle> particles, NeffMode mode) {
  if (particles.empty()) return 0.0;
  const double m = static_cast<double>(particles.size());
  if (mode == NeffMode::RawSumFraction) {
    double total = 0.0;
    for (const auto& p : particles) total += p.weight();
    return total / m;
  }
  const double top = detail::max_log_weight(particles);
  if (!std::isfinite(top)) return 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& p : particles) {
    const double w = std::exp(p.log_weight - top);
    sum += w;
    sum_sq += w * w;
  }
  return (sum * sum / sum_sq) / m;
}

// floor(r * M) particles drawn with replacement in proportion to weight,
// topped up with fresh uniform particles; every weight reset to one.
inline ParticleSet resample(std::span<const Particle> particles, const FilterConfig& config, RngStream& rng) {
  const double top = detail::max_log_weight(particles);
  if (!std::isfinite(top)) throw DegenerateFilter("cannot resample: every particle weight is zero");
  std::vector<double> cumulative(particles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    total += std::exp(particles[i].log_weight - top);
    cumulative[i] = total;
  }
  const std::size_t m = config.particles;
  const auto keep = static_cast<std::size_t>(std::floor(config.resample_fraction * static_cast<double>(m) + 1e-9));
  ParticleSet out;
  out.reserve(m);
  for (std::size_t i = 0; i < keep; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    Particle p = particles[static_cast<std::size_t>(it - cumulative.begin())];
    p.log_weight = 0.0;
    p.fresh = false;
    out.push_back(p);
  }
  while (out.size() < m) {
    Particle p = random_particle(config, rng);
    p.fresh = true;
    out.push_back(p);
  }
  return out;
}

// Independent zero-mean Gaussian jitter per parameter with standard deviation
// perturb_fraction * (range width), clamped back into range.
inline void perturb(ParticleSet& particles, const FilterConfig& config, RngStream& rng) {
  if (config.perturb_fraction == 0.0) return;
  const SkillRanges& r = config.ranges;
  const double s_sigma = config.perturb_fraction * r.sigma.width();
  const double s_rho = config.perturb_fraction * r.rho.width();
  const double s_lambda = config.perturb_fraction * r.lambda.width();
  for (auto& p : particles) {
    p.sigma_x = r.sigma.clamp(p.sigma_x + s_sigma * rng.normal());
    p.sigma_y = r.sigma.clamp(p.sigma_y + s_sigma * rng.normal());
    p.rho = r.rho.clamp(p.rho + s_rho * rng.normal());
    p.lambda = r.lambda.clamp(p.lambda + s_lambda * rng.normal());
  }
}

// Weighted mean of the particle parameters. Fresh particles are left out;
// if no non-fresh particle carries weight, every particle is used.
inline SkillEstimate estimate(std::span<const Particle> particles) {
  if (particles.empty()) throw InvalidParameter("cannot estimate from an empty particle set");
  auto accumulate = [&](bool skip_fresh, SkillEstimate& out) {
    double top = -INFINITY;
    for (const auto& p : particles)
      if (!(skip_fresh && p.fresh)) top = std::max(top, p.log_weight);
    if (!std::isfinite(top)) return false;
    double total = 0.0;
    SkillEstimate e;
    for (const auto& p : particles) {
      if (skip_fresh && p.fresh) continue;
      const double w = std::exp(p.log_weight - top);
      total += w;
      e.sigma_x += w * p.sigma_x;
      e.sigma_y += w * p.sigma_y;
      e.rho += w * p.rho;
      e.lambda += w * p.lambda;
    }
    out = {e.sigma_x / total, e.sigma_y / total, e.rho / total, e.lambda / total};
    return true;
  };
  SkillEstimate out;
  if (accumulate(true, out) || accumulate(false, out)) return out;
  // Every weight is zero: fall back to an unweighted mean.
  SkillEstimate e;
  for (const auto& p : particles) {
    e.sigma_x += p.sigma_x;
    e.sigma_y += p.sigma_y;
    e.rho += p.rho;
    e.lambda += p.lambda;
  }
  const double n = static_cast<double>(particles.size());
  return {e.sigma_x / n, e.sigma_y / n, e.rho / n, e.lambda / n};
}

inline double particle_log_likelihood(const Particle& p, const RewardGrid& reward, const ValueFieldEngine& engine,
                                      Vec2 executed) {
  const ExecutionSkillParams skill = p.skill();
  const ValueField field = engine.compute(reward, skill);
  return log_likelihood(field, BivariateNormal(skill), p.lambda, executed);
}

enum class StepPhase { Weight, Resample, Perturb };

inline std::string_view to_string(StepPhase p) {
  switch (p) {
    case StepPhase::Weight: return "weight";
    case StepPhase::Resample: return "resample";
    case StepPhase::Perturb: return "perturb";
  }
  return "unknown";
}

struct StepReport {
  std::size_t obs_index = 0;
  SkillEstimate estimate{};
  double neff = 0.0;
  bool resampled = false;
  bool reinitialized = false;
  std::vector<StepPhase> phases;
};

// Monte Carlo skill estimator. Each observation runs, in order: weight
// update, resampling check, perturbation.
class ParticleFilter {
 public:
  ParticleFilter(FilterConfig config, const ValueFieldEngine& engine)
      : config_((config.validate(), config)),
        engine_(&engine),
        init_rng_(config.seed, "filter-init"),
        resample_rng_(config.seed, "filter-resample"),
        perturb_rng_(config.seed, "filter-perturb"),
        particles_(init_particles(config_, init_rng_)) {}

  const FilterConfig& config() const { return config_; }
  const ParticleSet& particles() const { return particles_; }
  std::size_t observations() const { return observations_; }
  std::size_t degenerate_events() const { return degenerate_events_; }
  const StepReport& last_step() const { return last_; }

  SkillEstimate estimate() const { return mcse::estimate(particles_); }

  const StepReport& update(const RewardGrid& reward, Vec2 executed) {
    StepReport report;
    report.obs_index = observations_;

    for (auto& p : particles_) p.fresh = false;
    std::vector<double> log_lik(particles_.size());
    parallel_for(particles_.size(), config_.threads, [&](std::size_t i) {
      log_lik[i] = particle_log_likelihood(particles_[i], reward, *engine_, executed);
    });
    for (std::size_t i = 0; i < particles_.size(); ++i) particles_[i].log_weight += log_lik[i];
    report.phases.push_back(StepPhase::Weight);

    if (!std::isfinite(detail::max_log_weight(particles_))) {
      // Recovery: start over from the prior.
      particles_ = init_particles(config_, init_rng_);
      ++degenerate_events_;
      report.reinitialized = true;
    }

    report.neff = effective_count(particles_, config_.neff_mode);
    const bool trigger =
        config_.strategy == ResampleStrategy::Always || report.neff < config_.neff_threshold;
    if (trigger) {
      particles_ = resample(particles_, config_, resample_rng_);
      report.resampled = true;
      report.phases.push_back(StepPhase::Resample);
    }

    if (config_.perturb_every_step || report.resampled) {
      perturb(particles_, config_, perturb_rng_);
      report.phases.push_back(StepPhase::Perturb);
    }

    report.estimate = estimate();
    ++observations_;
    last_ = std::move(report);
    return last_;
  }

 private:
  FilterConfig config_;
  const ValueFieldEngine* engine_;
  RngStream init_rng_;
  RngStream resample_rng_;
  RngStream perturb_rng_;
  ParticleSet particles_;
  std::size_t observations_ = 0;
  std::size_t degenerate_events_ = 0;
  StepReport last_{};
};

}  // namespace mcse
