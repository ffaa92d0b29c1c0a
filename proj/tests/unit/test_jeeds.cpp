#include <gtest/gtest.h>

#include <cmath>

#include "mcse/darts.hpp"
#include "mcse/harness.hpp"
#include "mcse/jeeds.hpp"

using namespace mcse;
using namespace mcse::jeeds;

TEST(Levels, LinearAndLog) {
  const auto lin = spaced_levels({3.0, 150.5}, 33, LevelSpacing::Linear);
  ASSERT_EQ(lin.size(), 33u);
  EXPECT_EQ(lin.front(), 3.0);
  EXPECT_EQ(lin.back(), 150.5);
  EXPECT_NEAR(lin[1] - lin[0], 147.5 / 32.0, 1e-12);
  const auto lg = spaced_levels({0.001, 32.0}, 33, LevelSpacing::Log);
  EXPECT_EQ(lg.front(), 0.001);
  EXPECT_EQ(lg.back(), 32.0);
  EXPECT_NEAR(lg[1] / lg[0], lg[2] / lg[1], 1e-12);
  EXPECT_EQ(spaced_levels({2.0, 5.0}, 1, LevelSpacing::Linear).size(), 1u);
}

TEST(Grid, StartsUniform) {
  const auto g = jeeds_init();
  ASSERT_EQ(g.beliefs.size(), 33u * 33u);
  for (double b : g.beliefs) EXPECT_DOUBLE_EQ(b, 1.0 / 1089.0);
  EXPECT_NEAR(belief_entropy(g), std::log(1089.0), 1e-12);
  EXPECT_NEAR(belief_effective_fraction(g), 1.0, 1e-12);
}

TEST(Bayes, MatchesHandComputation) {
  JeedsConfig c;
  c.sigma_count = 2;
  c.lambda_count = 2;
  auto g = jeeds_init(c);
  bayes_update(g, {std::log(1.0), std::log(2.0), std::log(3.0), std::log(4.0)});
  EXPECT_NEAR(g.at(0, 0), 0.1, 1e-15);
  EXPECT_NEAR(g.at(0, 1), 0.2, 1e-15);
  EXPECT_NEAR(g.at(1, 0), 0.3, 1e-15);
  EXPECT_NEAR(g.at(1, 1), 0.4, 1e-15);
  bayes_update(g, {-2000.0, -2000.0, -2000.0 + std::log(2.0), -2001.0});
  const double z = 0.1 + 0.2 + 0.6 + 0.4 / std::exp(1.0);
  EXPECT_NEAR(g.at(1, 0), 0.6 / z, 1e-12);
  EXPECT_THROW(bayes_update(g, {1.0}), InvalidParameter);
  EXPECT_THROW(bayes_update(g, std::vector<double>(4, -INFINITY)), DegenerateFilter);
}

TEST(Estimate, PosteriorMeans) {
  JeedsConfig c;
  c.sigma_count = 2;
  c.lambda_count = 2;
  c.sigma = {10, 30};
  c.lambda = {1, 4};
  auto g = jeeds_init(c);
  g.beliefs = {0.1, 0.2, 0.3, 0.4};
  const auto e = jeeds_estimate(g);
  EXPECT_NEAR(e.sigma_x, 0.3 * 10 + 0.7 * 30, 1e-12);
  EXPECT_EQ(e.sigma_x, e.sigma_y);
  EXPECT_EQ(e.rho, 0.0);
  EXPECT_NEAR(e.lambda, 0.4 * 1 + 0.6 * 4, 1e-12);
}

TEST(Estimator, ConcentratesOnTrueSymmetricSkill) {
  const ActionGrid grid = darts::board_grid(10.0);
  const ValueFieldEngine engine(grid);
  std::vector<RewardGrid> rewards;
  for (const auto& s : generate_states(8, 60)) rewards.push_back(darts::rasterize_reward(s, grid));
  AgentSpec a{"a", {DecisionKind::Rational, 0.0}, Stationary{{40, 40, 0.0}}};
  const auto run = simulate_agent(a, 0, 8, rewards, engine);
  JeedsConfig c;
  c.sigma_count = 16;
  c.lambda_count = 8;
  JeedsEstimator est(c, engine);
  for (std::size_t i = 0; i < rewards.size(); ++i) est.update(rewards[i], run.observations[i].executed);
  EXPECT_NEAR(est.estimate().sigma_x, 40.0, 12.0);
  EXPECT_LT(belief_entropy(est.grid()), std::log(128.0) - 1.0);
  EXPECT_EQ(est.degenerate_events(), 0u);
}

TEST(Config, Validation) {
  JeedsConfig c;
  c.sigma_count = 0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = {};
  c.lambda = {0.0, 32.0};
  EXPECT_THROW(c.validate(), InvalidParameter);
}
