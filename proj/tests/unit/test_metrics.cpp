#include <gtest/gtest.h>

#include <cmath>

#include "mcse/metrics.hpp"
#include "oracles.hpp"

using namespace mcse;

TEST(Kl, MatchesQuadrature) {
  RngStream rng(1, "kl");
  for (int k = 0; k < 12; ++k) {
    const Gaussian2 p{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                      covariance({rng.uniform(1, 6), rng.uniform(1, 6), rng.uniform(-0.75, 0.75)})};
    const Gaussian2 q{{rng.uniform(-3, 3), rng.uniform(-3, 3)},
                      covariance({rng.uniform(1, 6), rng.uniform(1, 6), rng.uniform(-0.75, 0.75)})};
    const double exact = kl_bivariate(p, q);
    EXPECT_NEAR(exact, oracle::kl_quadrature(p, q), 1e-6 * std::max(1.0, exact)) << k;
  }
}

TEST(Jeffreys, IdentitySymmetryAndKnownValue) {
  const ExecutionSkillParams a{10, 20, 0.3}, b{40, 15, -0.2};
  EXPECT_NEAR(jeffreys(a, a), 0.0, 1e-14);
  EXPECT_NEAR(jeffreys(a, b), jeffreys(b, a), 1e-12);
  EXPECT_GT(jeffreys(a, b), 0.0);
  // Isotropic scales s and t: JD = (s/t)^2 + (t/s)^2 - 2.
  EXPECT_NEAR(jeffreys(ExecutionSkillParams{10, 10, 0}, ExecutionSkillParams{20, 20, 0}), 4.0 + 0.25 - 2.0, 1e-12);
}

TEST(Jeffreys, RejectsSingular) {
  const Gaussian2 bad{{}, {1.0, 1.0, 1.0}};
  EXPECT_THROW(jeffreys(bad, Gaussian2{}), InvalidParameter);
}

TEST(GeneralizedVariance, Determinant) {
  EXPECT_NEAR(generalized_variance(covariance({2, 3, 0.5})), 36.0 * 0.75, 1e-12);
  EXPECT_THROW(generalized_variance({1, 2, 1}), InvalidParameter);
}

TEST(StrikeZone, MatchesIndependentAxes) {
  const Rect zone{-0.83, 0.83, 1.5, 3.5};
  RngStream rng(2, "strike-zone");
  for (auto [sx, sy] : {std::pair{0.3, 0.4}, std::pair{0.8, 0.6}, std::pair{1.5, 1.5}}) {
    const auto est = strike_zone_probability(covariance({sx, sy, 0.0}), {0.1, 2.4}, zone, 200000, rng);
    const double exact = oracle::rectangle_probability(sx, sy, {0.1, 2.4}, zone);
    EXPECT_NEAR(est.probability, exact, 4.0 * est.standard_error + 1e-12);
    EXPECT_EQ(est.samples, 200000u);
  }
  EXPECT_THROW(strike_zone_probability(covariance({1, 1, 0}), {}, zone, 0, rng), InvalidParameter);
}
