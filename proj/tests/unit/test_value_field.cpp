#include <gtest/gtest.h>

#include <cmath>

#include "mcse/darts.hpp"
#include "mcse/value_field.hpp"
#include "oracles.hpp"

using namespace mcse;

namespace {

RewardGrid random_state_reward(std::uint64_t seed, const ActionGrid& grid) {
  RngStream rng(seed, "states");
  return darts::rasterize_reward(darts::generate_state(static_cast<std::int64_t>(seed), rng), grid);
}

}  // namespace

TEST(ValueField, MatchesDirectSummation) {
  const ActionGrid grid = darts::board_grid(5.0);
  const ValueFieldEngine engine(grid);
  RngStream rng(11, "params");
  for (int k = 0; k < 6; ++k) {
    const RewardGrid reward = random_state_reward(100 + k, grid);
    const ExecutionSkillParams p{rng.uniform(3, 150.5), rng.uniform(3, 150.5), rng.uniform(-0.75, 0.75)};
    const Kernel kernel = discretized_kernel(p, 5.0, grid.side() - 1);
    const ValueField f = engine.compute(reward, p);
    const auto direct = oracle::direct_value_field(reward, kernel);
    double worst = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i) worst = std::max(worst, std::abs(direct[i] - f.values[i]));
    EXPECT_LT(worst, 1e-6 * reward.max()) << p.sigma_x << "," << p.sigma_y << "," << p.rho;
  }
}

TEST(ValueField, ConstantRewardInteriorIsConstant) {
  const ActionGrid grid(1.0, 30.0);
  std::vector<double> values(grid.size(), 7.0);
  const RewardGrid reward = make_reward_grid(grid, values, 1);
  const ValueField f = ValueFieldEngine(grid).compute(reward, ExecutionSkillParams{2, 2, 0});
  // Cells more than 5 sigma from the edge see the full kernel.
  for (int r = 11; r < grid.side() - 11; ++r)
    for (int c = 11; c < grid.side() - 11; ++c) EXPECT_NEAR(f.values[grid.index(r, c)], 7.0, 7e-6);
}

TEST(ValueField, TinySigmaReproducesReward) {
  const ActionGrid grid = darts::board_grid(5.0);
  const RewardGrid reward = random_state_reward(3, grid);
  const ValueField f = ValueFieldEngine(grid).compute(reward, ExecutionSkillParams{0.2, 0.2, 0});
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(f.values[i], reward.values[i], 1e-9);
}

TEST(OptimalAction, SingleRewardCell) {
  const ActionGrid grid(1.0, 10.0);
  std::vector<double> values(grid.size(), 0.0);
  values[grid.index(4, 15)] = 1.0;
  const RewardGrid reward = make_reward_grid(grid, values, 1);
  const ValueField f = ValueFieldEngine(grid).compute(reward, ExecutionSkillParams{0.3, 0.3, 0});
  EXPECT_EQ(optimal_action(f), grid.cell(4, 15));
}

TEST(OptimalAction, SymmetricTieTakesLowestIndex) {
  const ActionGrid grid(1.0, 10.0);
  std::vector<double> values(grid.size(), 0.0);
  values[grid.index(10, 5)] = 1.0;
  values[grid.index(10, 15)] = 1.0;
  values[grid.index(5, 10)] = 1.0;
  values[grid.index(15, 10)] = 1.0;
  const RewardGrid reward = make_reward_grid(grid, values, 1);
  const ValueField f = ValueFieldEngine(grid).compute(reward, ExecutionSkillParams{1.5, 1.5, 0});
  EXPECT_EQ(f.argmax_cell, grid.index(5, 10));
}

TEST(OptimalAction, WideNoiseAimsNearerCenter) {
  const ActionGrid grid = darts::board_grid(5.0);
  const RewardGrid reward = random_state_reward(21, grid);
  const ValueField f = ValueFieldEngine(grid).compute(reward, ExecutionSkillParams{150, 150, 0});
  std::size_t best_cell = 0;
  for (std::size_t i = 1; i < reward.values.size(); ++i)
    if (reward.values[i] > reward.values[best_cell]) best_cell = i;
  EXPECT_LT(optimal_action(f).norm(), grid.cell(best_cell).norm());
  const auto direct = oracle::direct_value_field(reward, discretized_kernel({150, 150, 0}, 5.0, grid.side() - 1));
  std::size_t direct_best = 0;
  for (std::size_t i = 1; i < direct.size(); ++i)
    if (direct[i] > direct[direct_best] * (1 + 1e-12)) direct_best = i;
  EXPECT_NEAR((grid.cell(direct_best) - optimal_action(f)).norm(), 0.0, 5.0 + 1e-9);
}

TEST(ValueFieldEngine, CachesRewardSpectraAndDetectsChangedContent) {
  const ActionGrid grid = darts::board_grid(5.0);
  const ValueFieldEngine engine(grid);
  const RewardGrid a = random_state_reward(1, grid);
  RewardGrid b = random_state_reward(2, grid);
  b.key = a.key;  // reused key, different content
  const ExecutionSkillParams p{20, 20, 0};
  const auto fa = engine.compute(a, p);
  const auto fb = engine.compute(b, p);
  EXPECT_EQ(engine.cached_states(), 1u);
  const auto direct = oracle::direct_value_field(b, discretized_kernel(p, 5.0, grid.side() - 1));
  for (std::size_t i = 0; i < direct.size(); i += 97) EXPECT_NEAR(fb.values[i], direct[i], 1e-9);
  EXPECT_NE(fa.values, fb.values);
}

TEST(ValueFieldEngine, RejectsForeignGrid) {
  const ValueFieldEngine engine(darts::board_grid(5.0));
  const RewardGrid other = random_state_reward(1, darts::board_grid(10.0));
  EXPECT_THROW(engine.compute(other, ExecutionSkillParams{10, 10, 0}), InvalidParameter);
}

TEST(ValueFieldEngine, Deterministic) {
  const ActionGrid grid = darts::board_grid(5.0);
  const RewardGrid reward = random_state_reward(5, grid);
  const ExecutionSkillParams p{33, 77, 0.25};
  const auto a = ValueFieldEngine(grid).compute(reward, p);
  const auto b = ValueFieldEngine(grid).compute(reward, p);
  EXPECT_EQ(a.values, b.values);
}
