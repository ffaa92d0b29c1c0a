#include <gtest/gtest.h>

#include <sstream>

#include "mcse/baseball.hpp"

using namespace mcse;
using namespace mcse::baseball;

namespace {

std::string pitch_csv(std::size_t good) {
  std::ostringstream os;
  os << "\xEF\xBB\xBFpitcher,pitch_type,plate_x,plate_z,extra\n";
  for (std::size_t i = 0; i < good; ++i) os << "p1,FF," << (i % 7) * 0.1 << "," << 2.0 + (i % 5) * 0.1 << ",\"a,b\"\n";
  os << "p1,FF,,2.0,x\n";
  os << "p1,FF,nan,2.0,x\n";
  os << "p1,ZZ,0.1,2.0,x\n";
  os << "p2,FF,0.1,2.0,x\n";
  os << "p1,SL,0.1,2.0,x\n";
  return os.str();
}

}  // namespace

TEST(Ingest, FiltersAndReportsDroppedRows) {
  std::istringstream is(pitch_csv(5));
  IngestOptions o;
  o.pitch_type.reset();
  o.min_count = 1;
  const auto r = ingest_pitches(is, o);
  EXPECT_EQ(r.records.size(), 7u);
  EXPECT_EQ(r.dropped.size(), 3u);
  const auto groups = by_pitcher(r.records);
  EXPECT_EQ(groups.at("p1").size(), 6u);
  EXPECT_EQ(groups.at("p2").size(), 1u);

  std::istringstream is2(pitch_csv(5));
  o.pitch_type = "FF";
  o.pitcher = "p1";
  EXPECT_EQ(ingest_pitches(is2, o).records.size(), 5u);
}

TEST(Ingest, InsufficientDataAndMissingColumns) {
  std::istringstream is(pitch_csv(5));
  try {
    ingest_pitches(is, {});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient data"), std::string::npos);
  }
  std::istringstream bad("pitcher,plate_x,plate_z\np,1,2\n");
  EXPECT_THROW(ingest_pitches(bad, {}), DataError);
  std::istringstream empty("");
  EXPECT_THROW(ingest_pitches(empty, {}), DataError);
}

TEST(Ingest, AlternateDelimiterAndColumns) {
  std::istringstream is("id;type;px;pz\nq;FF;0.1;2.2\nq;FF;0.3;2.4\n");
  IngestOptions o;
  o.delimiter = ';';
  o.columns = {"id", "type", "px", "pz"};
  o.min_count = 2;
  const auto r = ingest_pitches(is, o);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_DOUBLE_EQ(r.records[1].plate_z, 2.4);
}

TEST(PitchReward, BinaryZoneOnCenteredGrid) {
  PitchModel m;
  m.resolution = 0.1;
  const auto reward = build_pitch_reward(m);
  EXPECT_EQ(reward.grid.center(), (Vec2{0.0, 2.5}));
  EXPECT_EQ(reward.grid.side(), 101);
  EXPECT_EQ(reward.values[reward.grid.locate({0.0, 2.5})], 1.0);
  EXPECT_EQ(reward.values[reward.grid.locate({0.9, 2.5})], 0.0);
  EXPECT_EQ(reward.values[reward.grid.locate({0.0, 3.6})], 0.0);
  StrikeZone z;
  z.z_low = 4.0;
  EXPECT_THROW(build_pitch_reward(z, 0.1), InvalidParameter);
}

TEST(Ellipse, QuantileAndAxes) {
  EXPECT_NEAR(chi2_2_quantile(0.95), 5.991464547107979, 1e-12);
  EXPECT_THROW(chi2_2_quantile(1.0), InvalidParameter);
  const auto e = confidence_ellipse(covariance({2.0, 1.0, 0.0}), 0.5, {1, 1});
  EXPECT_NEAR(e.semi_major, 2.0 * std::sqrt(2 * std::log(2.0)), 1e-12);
  EXPECT_NEAR(e.semi_minor, std::sqrt(2 * std::log(2.0)), 1e-12);
  EXPECT_NEAR(std::abs(std::cos(e.angle)), 1.0, 1e-12);
  EXPECT_TRUE(ellipse_contains(e, {1 + 2.3, 1}));
  EXPECT_FALSE(ellipse_contains(e, {1, 1 + 1.2}));
}

TEST(Ellipse, CoverageMatchesMass) {
  const Sym2 cov = covariance({0.4, 0.7, 0.5});
  const auto e = confidence_ellipse(cov, 0.9);
  RngStream rng(1, "ellipse");
  const BivariateNormal n(cov);
  int inside = 0;
  for (int i = 0; i < 100000; ++i) inside += ellipse_contains(e, n.transform(rng.normal2()));
  EXPECT_NEAR(inside / 100000.0, 0.9, 0.004);
}

TEST(EstimatePitcher, RecoversSyntheticSpread) {
  PitchModel m;
  m.resolution = 0.2;
  RngStream rng(4, "synthetic");
  const auto pitches = synthetic_pitches("s1", covariance({0.35, 0.6, 0.0}), m.zone.center(), 150, rng);
  EstimatorSpec spec;
  spec.mcse = pitch_filter_config(m);
  spec.mcse.particles = 150;
  const auto r = estimate_pitcher(pitches, spec, m, 4, 20000);
  EXPECT_EQ(r.n_pitches, 150u);
  EXPECT_NEAR(r.estimate.sigma_x, 0.35, 0.15);
  EXPECT_NEAR(r.estimate.sigma_y, 0.6, 0.2);
  EXPECT_GT(r.estimate.sigma_y, r.estimate.sigma_x);
  EXPECT_NEAR(r.gv, generalized_variance(r.estimate.covariance()), 1e-15);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("gv_units"), "ft^4");
  EXPECT_EQ(j.at("pitcher"), "s1");
  EXPECT_GT(j.at("strike_zone_prob").get<double>(), 0.0);
  EXPECT_THROW(estimate_pitcher({}, spec, m, 4), DataError);
}
