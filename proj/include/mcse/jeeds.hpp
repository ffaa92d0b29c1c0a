#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mcse/error.hpp"
#include "mcse/likelihood.hpp"
#include "mcse/mcse.hpp"
#include "mcse/noise.hpp"
#include "mcse/value_field.hpp"

namespace mcse::jeeds {

enum class LevelSpacing { Linear, Log };

struct JeedsConfig {
  std::size_t sigma_count = 33;
  std::size_t lambda_count = 33;
  Range sigma{3.0, 150.5};
  Range lambda{0.001, 32.0};
  LevelSpacing sigma_spacing = LevelSpacing::Linear;

  void validate() const {
    if (sigma_count < 1 || lambda_count < 1) throw InvalidParameter("JEEDS needs at least one level per axis");
    if (!(sigma.lo > 0.0) || !(sigma.lo <= sigma.hi)) throw InvalidParameter("JEEDS sigma range invalid");
    if (!(lambda.lo > 0.0) || !(lambda.lo <= lambda.hi)) throw InvalidParameter("JEEDS lambda range must be positive");
  }
};

inline std::vector<double> spaced_levels(Range r, std::size_t count, LevelSpacing spacing) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = spacing == LevelSpacing::Log ? std::sqrt(r.lo * r.hi) : 0.5 * (r.lo + r.hi);
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out[i] = spacing == LevelSpacing::Log ? std::exp(std::log(r.lo) + t * (std::log(r.hi) - std::log(r.lo)))
                                          : r.lo + t * r.width();
  }
  out.front() = r.lo;
  out.back() = r.hi;
  return out;
}

// Joint belief over symmetric execution skill sigma (rows) and rationality
// lambda (columns). beliefs[i * lambda_count + j] sums to one.
struct HypothesisGrid {
  std::vector<double> sigma_levels;
  std::vector<double> lambda_levels;
  std::vector<double> beliefs;

  std::size_t rows() const { return sigma_levels.size(); }
  std::size_t cols() const { return lambda_levels.size(); }
  double& at(std::size_t i, std::size_t j) { return beliefs[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return beliefs[i * cols() + j]; }
};

inline HypothesisGrid jeeds_init(const JeedsConfig& config = {}) {
  config.validate();
  HypothesisGrid g;
  g.sigma_levels = spaced_levels(config.sigma, config.sigma_count, config.sigma_spacing);
  g.lambda_levels = spaced_levels(config.lambda, config.lambda_count, LevelSpacing::Log);
  g.beliefs.assign(g.rows() * g.cols(), 1.0 / static_cast<double>(g.rows() * g.cols()));
  return g;
}

// Posterior proportional to prior * exp(log_likelihood), renormalized.
inline void bayes_update(HypothesisGrid& grid, const std::vector<double>& log_likelihood) {
  if (log_likelihood.size() != grid.beliefs.size()) throw InvalidParameter("likelihood shape mismatch");
  double top = -INFINITY;
  for (std::size_t k = 0; k < grid.beliefs.size(); ++k)
    if (grid.beliefs[k] > 0.0) top = std::max(top, std::log(grid.beliefs[k]) + log_likelihood[k]);
  if (!std::isfinite(top)) throw DegenerateFilter("JEEDS posterior has no mass");
  double total = 0.0;
  std::vector<double> post(grid.beliefs.size(), 0.0);
  for (std::size_t k = 0; k < post.size(); ++k) {
    if (grid.beliefs[k] > 0.0) post[k] = std::exp(std::log(grid.beliefs[k]) + log_likelihood[k] - top);
    total += post[k];
  }
  for (double& p : post) p /= total;
  grid.beliefs = std::move(post);
}

// log P(x | sigma_i, lambda_j) for every hypothesis, with isotropic noise.
inline std::vector<double> hypothesis_log_likelihoods(const HypothesisGrid& grid, const RewardGrid& reward,
                                                      const ValueFieldEngine& engine, Vec2 executed) {
  std::vector<double> out;
  out.reserve(grid.beliefs.size());
  for (double sigma : grid.sigma_levels) {
    const ExecutionSkillParams skill{sigma, sigma, 0.0};
    const ValueField field = engine.compute(reward, skill);
    const auto row = log_likelihoods(field, BivariateNormal(skill), grid.lambda_levels, executed);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

inline void jeeds_update(HypothesisGrid& grid, const RewardGrid& reward, const ValueFieldEngine& engine,
                         Vec2 executed) {
  bayes_update(grid, hypothesis_log_likelihoods(grid, reward, engine, executed));
}

// Posterior means of sigma and lambda; the implied covariance is sigma^2 I.
inline SkillEstimate jeeds_estimate(const HypothesisGrid& grid) {
  double sigma = 0.0;
  double lambda = 0.0;
  for (std::size_t i = 0; i < grid.rows(); ++i)
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      sigma += grid.at(i, j) * grid.sigma_levels[i];
      lambda += grid.at(i, j) * grid.lambda_levels[j];
    }
  return {sigma, sigma, 0.0, lambda};
}

inline double belief_entropy(const HypothesisGrid& grid) {
  double h = 0.0;
  for (double p : grid.beliefs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// Normalized effective hypothesis count, 1 / sum b^2 / size.
inline double belief_effective_fraction(const HypothesisGrid& grid) {
  double s = 0.0;
  for (double p : grid.beliefs) s += p * p;
  return s > 0.0 ? 1.0 / s / static_cast<double>(grid.beliefs.size()) : 0.0;
}

class JeedsEstimator {
 public:
  explicit JeedsEstimator(const JeedsConfig& config, const ValueFieldEngine& engine)
      : config_(config), engine_(&engine), grid_(jeeds_init(config)) {}

  const HypothesisGrid& grid() const { return grid_; }
  std::size_t degenerate_events() const { return degenerate_events_; }
  SkillEstimate estimate() const { return jeeds_estimate(grid_); }

  void update(const RewardGrid& reward, Vec2 executed) {
    try {
      jeeds_update(grid_, reward, *engine_, executed);
    } catch (const DegenerateFilter&) {
      grid_ = jeeds_init(config_);
      ++degenerate_events_;
    }
  }

 private:
  JeedsConfig config_;
  const ValueFieldEngine* engine_;
  HypothesisGrid grid_;
  std::size_t degenerate_events_ = 0;
};

}  // namespace mcse::jeeds
