#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "mcse/harness.hpp"

using namespace mcse;

namespace {

ExperimentConfig tiny_experiment(std::size_t workers) {
  ExperimentConfig c;
  c.n_observations = 4;
  c.resolution = 10.0;
  c.seeds = {1, 2};
  c.workers = workers;
  c.agents = {{"rational", {DecisionKind::Rational, 0.0}, Stationary{{30, 30, 0}}},
              {"softmax", {DecisionKind::Softmax, 3.0}, Stationary{{30, 30, 0}}}};
  EstimatorSpec m;
  m.id = "mcse";
  m.mcse.particles = 20;
  EstimatorSpec j;
  j.id = "jeeds";
  j.kind = EstimatorKind::Jeeds;
  j.jeeds.sigma_count = 4;
  j.jeeds.lambda_count = 3;
  c.estimators = {m, j};
  return c;
}

}  // namespace

TEST(Symmetry, StrictThresholds) {
  EXPECT_EQ(classify_symmetry({10, 59.9, 0.19}), Symmetry::Symmetric);
  EXPECT_EQ(classify_symmetry({10, 60, 0.0}), Symmetry::Asymmetric);
  EXPECT_EQ(classify_symmetry({10, 10, 0.2}), Symmetry::Asymmetric);
  EXPECT_EQ(classify_symmetry({10, 10, -0.2}), Symmetry::Asymmetric);
}

TEST(Experiment, RowsCompleteAndOrdered) {
  const auto rec = run_experiment(tiny_experiment(1));
  ASSERT_EQ(rec.rows.size(), 2u * 2u * 2u * 4u);
  EXPECT_EQ(rec.rows[0].seed, 1u);
  EXPECT_EQ(rec.rows[0].agent_id, "rational");
  EXPECT_EQ(rec.rows[0].estimator_id, "mcse");
  EXPECT_EQ(rec.rows[3].obs_index, 3u);
  EXPECT_EQ(rec.rows[4].estimator_id, "jeeds");
  for (const auto& r : rec.rows) {
    EXPECT_GE(r.jd, 0.0);
    EXPECT_EQ(r.truth.sigma_x, 30.0);
  }
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  const auto a = run_experiment(tiny_experiment(1));
  const auto b = run_experiment(tiny_experiment(3));
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].jd, b.rows[i].jd);
    EXPECT_EQ(a.rows[i].estimate.lambda, b.rows[i].estimate.lambda);
  }
}

TEST(Experiment, AgentsShareNoiseUnderOneSeed) {
  const ActionGrid grid = darts::board_grid(10.0);
  const ValueFieldEngine engine(grid);
  std::vector<RewardGrid> rewards;
  for (const auto& s : generate_states(3, 5)) rewards.push_back(darts::rasterize_reward(s, grid));
  const AgentSpec r{"r", {DecisionKind::Rational, 0.0}, Stationary{{25, 50, 0.2}}};
  const AgentSpec f{"f", {DecisionKind::Flip, 0.0}, Stationary{{25, 50, 0.2}}};
  const auto ra = simulate_agent(r, 0, 3, rewards, engine);
  const auto fa = simulate_agent(f, 1, 3, rewards, engine);
  RngStream noise(3, "agent-noise");
  const BivariateNormal n(ExecutionSkillParams{25, 50, 0.2});
  for (std::size_t i = 0; i < 5; ++i) {
    const Vec2 z = n.transform(noise.normal2());
    const Vec2 target = optimal_action(engine.compute(rewards[i], ExecutionSkillParams{25, 50, 0.2}));
    EXPECT_NEAR(ra.observations[i].executed.x, target.x + z.x, 1e-9);
    const Vec2 fz = fa.observations[i].executed - z;
    EXPECT_GE(grid.locate(fz), 0);
    EXPECT_NEAR(std::remainder(fz.x, 10.0), 0.0, 1e-9);
  }
}

TEST(Experiment, SharedSkillDrawIsPerSeed) {
  ExperimentConfig c = tiny_experiment(1);
  c.shared_skill_draw = SkillRanges{};
  const auto a = roster_for_seed(c, 1), b = roster_for_seed(c, 2);
  const auto sa = std::get<Stationary>(a[0].skill).skill;
  EXPECT_EQ(sa.sigma_x, std::get<Stationary>(a[1].skill).skill.sigma_x);
  EXPECT_NE(sa.sigma_x, std::get<Stationary>(b[0].skill).skill.sigma_x);
}

TEST(Experiment, Validation) {
  ExperimentConfig c = tiny_experiment(1);
  c.seeds.clear();
  EXPECT_THROW(run_experiment(c), InvalidParameter);
  c = tiny_experiment(1);
  c.estimators[0].mcse.particles = 0;
  EXPECT_THROW(run_experiment(c), InvalidParameter);
}

TEST(Aggregation, MeanCurveAveragesOverRunsOnly) {
  RunRecord rec;
  for (std::uint64_t seed : {1, 2})
    for (std::size_t i = 0; i < 3; ++i) {
      RunRow r;
      r.seed = seed;
      r.agent_id = "a";
      r.estimator_id = "m";
      r.obs_index = i;
      r.jd = static_cast<double>(seed * 10 + i);
      rec.rows.push_back(r);
    }
  const auto curve = mean_jd_curve(rec, "m");
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_DOUBLE_EQ(curve[1].mean, 16.0);
  EXPECT_DOUBLE_EQ(curve[1].standard_error, 5.0);
  EXPECT_EQ(curve[1].count, 2u);
  const auto fin = final_jd(rec, "m");
  EXPECT_EQ(fin.n, 2u);
  EXPECT_DOUBLE_EQ(fin.mean(), 17.0);
  EXPECT_TRUE(mean_jd_curve(rec, "other").empty());
}

TEST(Sweep, GridsAndLabels) {
  const auto r1 = round1_entries();
  ASSERT_EQ(r1.size(), 18u);
  std::set<std::string> labels;
  for (const auto& e : r1) labels.insert(e.label);
  EXPECT_EQ(labels.size(), 18u);
  EXPECT_EQ(particle_count_entries().size(), 6u);
  EXPECT_EQ(tuning_roster().size(), 9u);
  EXPECT_EQ(sweep_label(FilterConfig{}), "M1000_r0.9_w0.005_neff");
}

TEST(Sweep, RejectsEmptyAndDuplicateGrids) {
  SweepSpec s;
  s.seeds = {1};
  EXPECT_THROW(parameter_sweep(s), InvalidParameter);
  s.entries = {{"a", FilterConfig{}}, {"a", FilterConfig{}}};
  EXPECT_THROW(parameter_sweep(s), InvalidParameter);
}

TEST(Sweep, RankedAscendingByFinalJd) {
  SweepSpec s;
  s.seeds = {1};
  s.n_observations = 3;
  s.resolution = 10.0;
  s.agents = {tuning_roster()[0], tuning_roster()[8]};
  FilterConfig c;
  c.particles = 10;
  s.entries = particle_count_entries(c);
  s.entries.resize(2);
  RunRecord rec;
  const auto rows = parameter_sweep(s, &rec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].rank, 1u);
  EXPECT_LE(rows[0].mean_final_jd, rows[1].mean_final_jd);
  EXPECT_EQ(rows[0].runs, 2u);
  EXPECT_EQ(rec.rows.size(), 2u * 2u * 3u);
  std::ostringstream os;
  write_sweep_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "rank,label,w_pct,r,strategy,particles,mean_final_jd,standard_error,runs");
}

TEST(RunCsv, HeaderAndRowShape) {
  const auto rec = run_experiment(tiny_experiment(1));
  std::ostringstream os;
  write_run_csv(os, rec);
  std::istringstream is(os.str());
  const auto t = io::read_table(is);
  EXPECT_EQ(t.header, kRunCsvHeader);
  EXPECT_EQ(t.rows.size(), rec.rows.size());
  EXPECT_EQ(t.rows[5][1], rec.rows[5].agent_id);
  EXPECT_EQ(io::parse_number(t.rows[5][4]), rec.rows[5].jd);
}

TEST(FilterConfigJson, RoundTripAndRejectsUnknown) {
  FilterConfig c;
  c.particles = 77;
  c.strategy = ResampleStrategy::Always;
  c.neff_mode = NeffMode::NormalizedEss;
  const auto back = filter_config_from_json(to_json(c));
  EXPECT_EQ(back.particles, 77u);
  EXPECT_EQ(back.strategy, ResampleStrategy::Always);
  EXPECT_EQ(back.neff_mode, NeffMode::NormalizedEss);
  EXPECT_THROW(filter_config_from_json({{"strategy", "sometimes"}}), InvalidParameter);
  EXPECT_THROW(filter_config_from_json({{"resample_fraction", 2.0}}), InvalidParameter);
}
