#include <gtest/gtest.h>

#include <cmath>

#include "mcse/likelihood.hpp"
#include "oracles.hpp"

using namespace mcse;

namespace {

ValueField field_from(const ActionGrid& grid, std::vector<double> values) {
  ValueField f;
  f.grid = grid;
  f.values = std::move(values);
  finalize_field(f, -1e300, 1e300);
  return f;
}

}  // namespace

TEST(Likelihood, MatchesLiteralFormulaOnSmallGrids) {
  RngStream rng(1, "likelihood");
  for (int k = 0; k < 100; ++k) {
    const int half = static_cast<int>(rng.integer(0, 4));
    const double res = rng.uniform(1.0, 10.0);
    const ActionGrid grid(res, half * res, {rng.uniform(-5, 5), rng.uniform(-5, 5)});
    std::vector<double> values(grid.size());
    for (double& v : values) v = rng.uniform(0.0, 60.0);
    const ExecutionSkillParams p{rng.uniform(3, 150), rng.uniform(3, 150), rng.uniform(-0.75, 0.75)};
    const double lambda = rng.uniform(0.001, 32.0);
    const Vec2 x{rng.uniform(-60, 60), rng.uniform(-60, 60)};
    const auto f = field_from(grid, values);
    const double fast = likelihood(f, BivariateNormal(p), lambda, x);
    const long double slow = oracle::literal_likelihood(values, grid, covariance(p), lambda, x);
    EXPECT_NEAR(fast / static_cast<double>(slow), 1.0, 1e-12) << "instance " << k;
  }
}

TEST(Likelihood, ZeroLambdaIsUniformMixture) {
  const ActionGrid grid(4.0, 8.0);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i % 7);
  const ExecutionSkillParams p{5, 9, 0.2};
  const Vec2 x{1.5, -2.0};
  double mix = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) mix += pdf(p, x - grid.cell(i));
  mix /= static_cast<double>(grid.size());
  EXPECT_NEAR(likelihood(field_from(grid, values), BivariateNormal(p), 0.0, x) / mix, 1.0, 1e-13);
}

TEST(Likelihood, SingleCellIsNoiseDensity) {
  const ActionGrid grid(5.0, 0.0, {3.0, 4.0});
  const ExecutionSkillParams p{7, 11, -0.3};
  const Vec2 x{10.0, -2.0};
  EXPECT_NEAR(likelihood(field_from(grid, {12.0}), BivariateNormal(p), 5.0, x) / pdf(p, x - Vec2{3, 4}), 1.0, 1e-14);
}

TEST(Likelihood, FarObservationStaysFinite) {
  const ActionGrid grid(5.0, 170.0);
  std::vector<double> values(grid.size(), 1.0);
  const auto f = field_from(grid, values);
  const double ll = log_likelihood(f, BivariateNormal(ExecutionSkillParams{3, 3, 0}), 32.0, {5000, 5000});
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_LT(ll, -1e5);
}

TEST(Likelihood, BatchMatchesSingle) {
  const ActionGrid grid(5.0, 20.0);
  std::vector<double> values(grid.size());
  RngStream rng(2, "batch");
  for (double& v : values) v = rng.uniform(0, 50);
  const auto f = field_from(grid, values);
  const BivariateNormal noise(ExecutionSkillParams{12, 12, 0});
  const std::vector<double> lambdas{0.001, 0.5, 4.0, 32.0};
  const auto batch = log_likelihoods(f, noise, lambdas, {3, -7});
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    EXPECT_DOUBLE_EQ(batch[i], log_likelihood(f, noise, lambdas[i], {3, -7}));
}
