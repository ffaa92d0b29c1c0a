#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcse/agents.hpp"
#include "mcse/darts.hpp"
#include "mcse/io.hpp"
#include "mcse/jeeds.hpp"
#include "mcse/mcse.hpp"
#include "mcse/metrics.hpp"
#include "mcse/parallel.hpp"

namespace mcse {

enum class Symmetry { Symmetric, Asymmetric };

inline std::string_view to_string(Symmetry s) { return s == Symmetry::Symmetric ? "symmetric" : "asymmetric"; }

inline Symmetry classify_symmetry(const ExecutionSkillParams& skill) {
  skill.validate();
  return std::abs(skill.sigma_x - skill.sigma_y) < 50.0 && std::abs(skill.rho) < 0.2 ? Symmetry::Symmetric
                                                                                      : Symmetry::Asymmetric;
}

enum class EstimatorKind { Mcse, Jeeds };

struct EstimatorSpec {
  std::string id = "mcse";
  EstimatorKind kind = EstimatorKind::Mcse;
  FilterConfig mcse{};
  jeeds::JeedsConfig jeeds{};
};

struct ExperimentConfig {
  std::size_t n_observations = 100;
  std::vector<AgentSpec> agents;
  // When set, each seed draws one stationary skill shared by every agent.
  std::optional<SkillRanges> shared_skill_draw;
  std::vector<EstimatorSpec> estimators;
  std::vector<std::uint64_t> seeds;
  double resolution = 5.0;
  darts::StateOptions states{};
  std::size_t workers = 1;

  void validate() const {
    if (n_observations < 1) throw InvalidParameter("n_observations must be >= 1");
    if (agents.empty()) throw InvalidParameter("experiment needs at least one agent");
    if (estimators.empty()) throw InvalidParameter("experiment needs at least one estimator");
    if (seeds.empty()) throw InvalidParameter("experiment needs at least one seed");
    if (!(resolution > 0.0)) throw InvalidParameter("resolution must be positive");
    if (workers < 1) throw InvalidParameter("workers must be >= 1");
    for (const auto& a : agents) a.decision.validate();
    for (const auto& e : estimators) {
      if (e.kind == EstimatorKind::Mcse) e.mcse.validate();
      else e.jeeds.validate();
    }
  }
};

// One row per (seed, agent, estimator, observation).
struct RunRow {
  std::uint64_t seed = 0;
  std::string agent_id;
  std::string estimator_id;
  std::size_t obs_index = 0;
  double jd = 0.0;
  SkillEstimate estimate{};
  ExecutionSkillParams truth{};
  double true_lambda = 0.0;
  double neff = 0.0;
  bool resampled = false;
};

struct RunRecord {
  std::vector<RunRow> rows;
};

// Everything one (seed, agent) pair sees: states, executed actions and the
// time-indexed true skill.
struct AgentRun {
  std::uint64_t seed = 0;
  AgentSpec agent;
  std::vector<RewardGrid> rewards;
  std::vector<Observation> observations;
  std::vector<ExecutionSkillParams> truth;
};

inline std::vector<darts::DartboardState> generate_states(std::uint64_t seed, std::size_t n,
                                                          const darts::StateOptions& options = {}) {
  RngStream rng(seed, "states");
  std::vector<darts::DartboardState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(darts::generate_state(static_cast<std::int64_t>(i), rng, options));
  return out;
}

// Simulates one agent. `agent_index` selects the agent's own target stream;
// the noise stream is the same for every agent under one seed.
inline AgentRun simulate_agent(const AgentSpec& agent, std::size_t agent_index, std::uint64_t seed,
                               const std::vector<RewardGrid>& rewards, const ValueFieldEngine& engine) {
  AgentRun run;
  run.seed = seed;
  run.agent = agent;
  run.rewards = rewards;
  RngStream targets = RngStream::derived(seed, "agent-targets", agent_index);
  RngStream noise(seed, "agent-noise");
  const std::size_t n = rewards.size();
  for (std::size_t i = 0; i < n; ++i) {
    run.observations.push_back(step(agent, rewards[i], i, n, engine, targets, noise));
    run.truth.push_back(current_skill(agent.skill, i, n));
  }
  return run;
}

// Runs one estimator over a simulated sequence.
inline std::vector<RunRow> run_estimator(const EstimatorSpec& spec, const AgentRun& run, const ValueFieldEngine& engine) {
  std::vector<RunRow> rows;
  rows.reserve(run.observations.size());
  auto push = [&](std::size_t i, const SkillEstimate& est, double neff, bool resampled) {
    RunRow r;
    r.seed = run.seed;
    r.agent_id = run.agent.id;
    r.estimator_id = spec.id;
    r.obs_index = i;
    r.estimate = est;
    r.truth = run.truth[i];
    r.true_lambda = run.agent.decision.lambda;
    r.jd = jeffreys(r.truth, est.skill());
    r.neff = neff;
    r.resampled = resampled;
    rows.push_back(std::move(r));
  };
  if (spec.kind == EstimatorKind::Mcse) {
    FilterConfig cfg = spec.mcse;
    cfg.seed = run.seed;
    ParticleFilter filter(cfg, engine);
    for (std::size_t i = 0; i < run.observations.size(); ++i) {
      const auto& rep = filter.update(run.rewards[i], run.observations[i].executed);
      push(i, rep.estimate, rep.neff, rep.resampled);
    }
  } else {
    jeeds::JeedsEstimator est(spec.jeeds, engine);
    for (std::size_t i = 0; i < run.observations.size(); ++i) {
      est.update(run.rewards[i], run.observations[i].executed);
      push(i, est.estimate(), jeeds::belief_effective_fraction(est.grid()), false);
    }
  }
  return rows;
}

inline std::vector<AgentSpec> roster_for_seed(const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<AgentSpec> agents = config.agents;
  if (config.shared_skill_draw) {
    RngStream rng(seed, "agent-skill");
    const ExecutionSkillParams skill = random_skill(*config.shared_skill_draw, rng);
    for (auto& a : agents) a.skill = Stationary{skill};
  }
  return agents;
}

// All estimators see the identical observation sequence of each agent; all
// agents under one seed share states and execution-noise draws.
inline RunRecord run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ActionGrid grid = darts::board_grid(config.resolution, config.states.geometry);
  const ValueFieldEngine engine(grid, std::max<std::size_t>(512, 2 * config.n_observations));

  struct Job {
    std::uint64_t seed;
    std::size_t agent_index;
  };
  std::vector<Job> jobs;
  for (auto seed : config.seeds)
    for (std::size_t a = 0; a < config.agents.size(); ++a) jobs.push_back({seed, a});

  std::map<std::uint64_t, std::vector<RewardGrid>> rewards;
  for (auto seed : config.seeds) {
    auto& r = rewards[seed];
    for (const auto& s : generate_states(seed, config.n_observations, config.states))
      r.push_back(darts::rasterize_reward(s, grid));
  }

  std::vector<std::vector<RunRow>> results(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto agents = roster_for_seed(config, job.seed);
    const AgentRun run = simulate_agent(agents[job.agent_index], job.agent_index, job.seed, rewards.at(job.seed), engine);
    for (const auto& est : config.estimators) {
      auto rows = run_estimator(est, run, engine);
      results[j].insert(results[j].end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    }
  });

  RunRecord record;
  for (auto& r : results)
    record.rows.insert(record.rows.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  return record;
}

// Aggregation

struct MeanPoint {
  std::size_t obs_index = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
};

struct MeanAccumulator {
  std::size_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    ++n;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : std::nan(""); }
  double standard_error() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

// Mean JD per observation index for one estimator, over the rows accepted by
// `filter`. Averages run over seeds and agents, never over observations.
template <class Filter>
std::vector<MeanPoint> mean_jd_curve(const RunRecord& record, std::string_view estimator_id, Filter filter) {
  std::map<std::size_t, MeanAccumulator> acc;
  for (const auto& r : record.rows)
    if (r.estimator_id == estimator_id && filter(r)) acc[r.obs_index].add(r.jd);
  std::vector<MeanPoint> out;
  for (const auto& [i, a] : acc) out.push_back({i, a.mean(), a.standard_error(), a.n});
  return out;
}

inline std::vector<MeanPoint> mean_jd_curve(const RunRecord& record, std::string_view estimator_id) {
  return mean_jd_curve(record, estimator_id, [](const RunRow&) { return true; });
}

template <class Filter>
MeanAccumulator final_jd(const RunRecord& record, std::string_view estimator_id, Filter filter) {
  std::map<std::pair<std::uint64_t, std::string>, const RunRow*> last;
  for (const auto& r : record.rows) {
    if (r.estimator_id != estimator_id || !filter(r)) continue;
    auto& slot = last[{r.seed, r.agent_id}];
    if (slot == nullptr || slot->obs_index < r.obs_index) slot = &r;
  }
  MeanAccumulator acc;
  for (const auto& [k, r] : last) acc.add(r->jd);
  return acc;
}

inline MeanAccumulator final_jd(const RunRecord& record, std::string_view estimator_id) {
  return final_jd(record, estimator_id, [](const RunRow&) { return true; });
}

// Long-form CSV, schema version 1.
inline constexpr int kRunCsvVersion = 1;

inline const std::vector<std::string> kRunCsvHeader = {
    "seed",       "agent_id",   "estimator_id", "obs_index",    "jd",           "est_sigma_x", "est_sigma_y",
    "est_rho",    "est_lambda", "true_sigma_x", "true_sigma_y", "true_rho",     "true_lambda", "neff",
    "resampled_flag"};

inline void write_run_csv(std::ostream& os, const RunRecord& record) {
  io::write_row(os, kRunCsvHeader);
  using io::format_number;
  for (const auto& r : record.rows)
    io::write_row(os, {std::to_string(r.seed), r.agent_id, r.estimator_id, std::to_string(r.obs_index),
                       format_number(r.jd), format_number(r.estimate.sigma_x), format_number(r.estimate.sigma_y),
                       format_number(r.estimate.rho), format_number(r.estimate.lambda), format_number(r.truth.sigma_x),
                       format_number(r.truth.sigma_y), format_number(r.truth.rho), format_number(r.true_lambda),
                       format_number(r.neff), r.resampled ? "1" : "0"});
}

// Parameter sweeps

struct SweepEntry {
  std::string label;
  FilterConfig config;
};

struct SweepSpec {
  std::vector<SweepEntry> entries;
  std::vector<AgentSpec> agents;
  std::vector<std::uint64_t> seeds;
  std::size_t n_observations = 100;
  double resolution = 5.0;
  std::size_t workers = 1;
};

struct SweepRow {
  std::size_t rank = 0;
  std::string label;
  double w_pct = 0.0;
  double r = 0.0;
  std::string strategy;
  std::size_t particles = 0;
  double mean_final_jd = 0.0;
  double standard_error = 0.0;
  std::size_t runs = 0;
};

inline std::string strategy_name(const FilterConfig& c) {
  return c.strategy == ResampleStrategy::Always ? "always" : "neff";
}

inline std::string sweep_label(const FilterConfig& c) {
  return "M" + std::to_string(c.particles) + "_r" + io::format_number(c.resample_fraction) + "_w" +
         io::format_number(c.perturb_fraction) + "_" + strategy_name(c);
}

// 9 Rational agents: sigma in {(10,10), (10,100), (100,100)} x rho in {-0.75, 0, 0.75}.
inline std::vector<AgentSpec> tuning_roster() {
  std::vector<AgentSpec> out;
  const std::pair<double, double> sigmas[] = {{10, 10}, {10, 100}, {100, 100}};
  for (auto [sx, sy] : sigmas)
    for (double rho : {-0.75, 0.0, 0.75}) {
      AgentSpec a;
      a.id = "rational_" + io::format_number(sx) + "_" + io::format_number(sy) + "_" + io::format_number(rho);
      a.decision = {DecisionKind::Rational, 0.0};
      a.skill = Stationary{{sx, sy, rho}};
      out.push_back(std::move(a));
    }
  return out;
}

// w% in {0.002, 0.005, 0.020} x r in {0.75, 0.90, 0.95} x {always, n_eff}.
inline std::vector<SweepEntry> round1_entries(const FilterConfig& base = {}) {
  std::vector<SweepEntry> out;
  for (double w : {0.002, 0.005, 0.020})
    for (double r : {0.75, 0.90, 0.95})
      for (auto s : {ResampleStrategy::Always, ResampleStrategy::EffectiveThreshold}) {
        FilterConfig c = base;
        c.perturb_fraction = w;
        c.resample_fraction = r;
        c.strategy = s;
        out.push_back({sweep_label(c), c});
      }
  return out;
}

inline std::vector<SweepEntry> particle_count_entries(const FilterConfig& base = {}) {
  std::vector<SweepEntry> out;
  for (std::size_t m : {50, 100, 500, 1000, 1500, 2000}) {
    FilterConfig c = base;
    c.particles = m;
    out.push_back({sweep_label(c), c});
  }
  return out;
}

inline ExperimentConfig sweep_experiment(const SweepSpec& spec) {
  ExperimentConfig cfg;
  cfg.n_observations = spec.n_observations;
  cfg.agents = spec.agents.empty() ? tuning_roster() : spec.agents;
  cfg.seeds = spec.seeds;
  cfg.resolution = spec.resolution;
  cfg.workers = spec.workers;
  for (const auto& e : spec.entries) cfg.estimators.push_back({e.label, EstimatorKind::Mcse, e.config, {}});
  return cfg;
}

// Final JD averaged over the roster and seeds, sorted from smallest to
// largest. Ties keep the input order.
inline std::vector<SweepRow> rank_sweep(const SweepSpec& spec, const RunRecord& record) {
  std::vector<SweepRow> rows;
  for (const auto& e : spec.entries) {
    const auto acc = final_jd(record, e.label);
    SweepRow row;
    row.label = e.label;
    row.w_pct = e.config.perturb_fraction;
    row.r = e.config.resample_fraction;
    row.strategy = strategy_name(e.config);
    row.particles = e.config.particles;
    row.mean_final_jd = acc.mean();
    row.standard_error = acc.standard_error();
    row.runs = acc.n;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.mean_final_jd < b.mean_final_jd; });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return rows;
}

inline std::vector<SweepRow> parameter_sweep(const SweepSpec& spec, RunRecord* record_out = nullptr) {
  if (spec.entries.empty()) throw InvalidParameter("sweep grid is empty");
  std::map<std::string, int> seen;
  for (const auto& e : spec.entries)
    if (seen[e.label]++) throw InvalidParameter("duplicate sweep label '" + e.label + "'");
  RunRecord record = run_experiment(sweep_experiment(spec));
  auto rows = rank_sweep(spec, record);
  if (record_out) *record_out = std::move(record);
  return rows;
}

inline const std::vector<std::string> kSweepCsvHeader = {"rank", "label", "w_pct", "r", "strategy",
                                                         "particles", "mean_final_jd", "standard_error", "runs"};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  io::write_row(os, kSweepCsvHeader);
  for (const auto& r : rows)
    io::write_row(os, {std::to_string(r.rank), r.label, io::format_number(r.w_pct), io::format_number(r.r), r.strategy,
                       std::to_string(r.particles), io::format_number(r.mean_final_jd),
                       io::format_number(r.standard_error), std::to_string(r.runs)});
}

// JSON configs

inline nlohmann::json to_json(const FilterConfig& c) {
  return {{"particles", c.particles},
          {"resample_fraction", c.resample_fraction},
          {"perturb_fraction", c.perturb_fraction},
          {"strategy", strategy_name(c)},
          {"neff_threshold", c.neff_threshold},
          {"neff_mode", c.neff_mode == NeffMode::RawSumFraction ? "raw" : "normalized"},
          {"perturb_every_step", c.perturb_every_step}};
}

inline FilterConfig filter_config_from_json(const nlohmann::json& j, FilterConfig c = {}) {
  c.particles = j.value("particles", c.particles);
  c.resample_fraction = j.value("resample_fraction", c.resample_fraction);
  c.perturb_fraction = j.value("perturb_fraction", c.perturb_fraction);
  if (j.contains("strategy")) {
    const auto s = j.at("strategy").get<std::string>();
    if (s == "always") c.strategy = ResampleStrategy::Always;
    else if (s == "neff") c.strategy = ResampleStrategy::EffectiveThreshold;
    else throw InvalidParameter("unknown resampling strategy '" + s + "'");
  }
  c.neff_threshold = j.value("neff_threshold", c.neff_threshold);
  if (j.contains("neff_mode")) {
    const auto s = j.at("neff_mode").get<std::string>();
    if (s == "raw") c.neff_mode = NeffMode::RawSumFraction;
    else if (s == "normalized") c.neff_mode = NeffMode::NormalizedEss;
    else throw InvalidParameter("unknown n_eff mode '" + s + "'");
  }
  c.perturb_every_step = j.value("perturb_every_step", c.perturb_every_step);
  c.validate();
  return c;
}

}  // namespace mcse
