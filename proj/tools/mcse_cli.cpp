// mcse: simulate agents, estimate skill, run sweeps and the pitch analysis.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mcse/baseball.hpp"
#include "mcse/harness.hpp"
#include "mcse/io.hpp"
#include "mcse/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mcse;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;

constexpr const char* kOutputDirEnv = "MCSE_OUTPUT_DIR";

// JSON config files: top-level keys are global flags, nested objects hold the
// flags of the subcommand with that name.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames()[0];
      if (opt->count() > 0) {
        const auto& r = opt->results();
        j[name] = r.size() == 1 ? json(r[0]) : json(r);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      const std::string inner = to_config(sub, default_also, false, "");
      if (inner != "null" && inner != "{}") j[sub->get_name()] = json::parse(inner);
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> out;
    collect(j, "", {}, out);
    return out;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const json& j, const std::string& name, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& out) {
    if (j.is_object()) {
      if (!name.empty()) parents.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) collect(*it, it.key(), parents, out);
      return;
    }
    CLI::ConfigItem item;
    item.name = name;
    item.parents = parents;
    if (j.is_array()) {
      // Arrays of numbers are comma lists (e.g. "sigma": [30, 90, 0.3]).
      bool numeric = !j.empty();
      for (const auto& v : j) numeric = numeric && v.is_number();
      if (numeric) {
        std::string joined;
        for (const auto& v : j) joined += (joined.empty() ? "" : ",") + scalar(v);
        item.inputs = {joined};
      } else {
        for (const auto& v : j) item.inputs.push_back(scalar(v));
      }
    } else {
      item.inputs = {scalar(j)};
    }
    out.push_back(std::move(item));
  }
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(io::parse_number(part));
    } catch (const DataError&) {
      throw InvalidParameter(flag + ": '" + part + "' is not a number");
    }
  }
  if (out.size() != expected)
    throw InvalidParameter(flag + " expects " + std::to_string(expected) + " comma-separated numbers");
  return out;
}

ExecutionSkillParams parse_skill(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) v.push_back(io::parse_number(part));
  if (v.size() == 1) v = {v[0], v[0], 0.0};
  if (v.size() == 2) v.push_back(0.0);
  if (v.size() != 3) throw InvalidParameter(flag + " expects sigma, sigma_x,sigma_y or sigma_x,sigma_y,rho");
  ExecutionSkillParams p{v[0], v[1], v[2]};
  p.validate();
  return p;
}

struct Global {
  std::uint64_t seed = 1;
  std::string out_dir;
  std::size_t threads = 1;
};

struct FilterFlags {
  std::size_t m = 1000;
  double r = 0.9;
  double w_pct = 0.005;
  std::string resample = "neff";
  double tau = 0.5;
  std::string neff_mode = "raw";

  void add(CLI::App* app) {
    app->add_option("--m", m, "Number of particles")->capture_default_str();
    app->add_option("--r", r, "Fraction of resampled particles drawn by weight (rest re-initialized)")
        ->capture_default_str();
    app->add_option("--w-pct", w_pct, "Perturbation std as a fraction of each parameter range")->capture_default_str();
    app->add_option("--resample", resample, "Resampling trigger")
        ->check(CLI::IsMember({"neff", "always"}))
        ->capture_default_str();
    app->add_option("--tau", tau, "Effective-count threshold for --resample neff")->capture_default_str();
    app->add_option("--neff-mode", neff_mode, "Effective count: raw weight sum / M, or normalized ESS / M")
        ->check(CLI::IsMember({"raw", "normalized"}))
        ->capture_default_str();
  }

  FilterConfig config(std::uint64_t seed, std::size_t threads) const {
    FilterConfig c;
    c.particles = m;
    c.resample_fraction = r;
    c.perturb_fraction = w_pct;
    c.strategy = resample == "always" ? ResampleStrategy::Always : ResampleStrategy::EffectiveThreshold;
    c.neff_threshold = tau;
    c.neff_mode = neff_mode == "raw" ? NeffMode::RawSumFraction : NeffMode::NormalizedEss;
    c.seed = seed;
    c.threads = threads;
    c.validate();
    return c;
  }
};

struct SimulateFlags {
  std::string agent = "rational";
  std::string sigma;
  std::string sigma_initial;
  std::string sigma_final;
  std::optional<std::size_t> change_step;
  std::optional<double> lambda;
  std::size_t n = 100;
  double resolution = 5.0;
  bool shuffle_bull = false;
  bool zero_noise = false;
};

struct EstimateFlags {
  std::string obs;
  std::string states;
  std::string truth;
  std::string method = "mcse";
  std::optional<double> resolution;
  std::string trace;
  std::string final_json;
  FilterFlags filter;
};

struct SweepFlags {
  std::string round = "both";
  std::size_t seeds = 10;
  std::size_t n = 100;
  double resolution = 5.0;
  std::size_t workers = 1;
  bool runs = false;
};

struct BaseballFlags {
  std::string data;
  std::string synthetic;
  std::size_t n_pitches = 500;
  std::string pitcher;
  std::string pitch_type = "FF";
  std::size_t min_count = 100;
  std::string col_pitcher = "pitcher", col_pitch_type = "pitch_type", col_x = "plate_x", col_z = "plate_z";
  std::string delimiter = ",";
  std::string method = "both";
  double resolution = 0.1;
  double zone_half_width = 0.83, zone_low = 1.5, zone_high = 3.5;
  std::size_t samples = kStrikeZoneSamples;
  double mass = 0.5;
  FilterFlags filter;
};

struct PlotFlags {
  std::vector<std::string> traces;
  std::vector<std::string> estimates;
  std::string out;
  std::string title;
  double mass = 0.5;
  std::string zone;
};

struct ValidateFlags {
  std::string file;
};

struct Flags {
  Global global;
  SimulateFlags simulate;
  EstimateFlags estimate;
  SweepFlags sweep;
  BaseballFlags baseball;
  PlotFlags plot;
  ValidateFlags validate;
};

struct Commands {
  CLI::App* simulate;
  CLI::App* estimate;
  CLI::App* sweep;
  CLI::App* baseball;
  CLI::App* plot;
  CLI::App* validate;
};

Commands build_app(CLI::App& app, Flags& f) {
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_option("--seed", f.global.seed, "Master seed; every random stream derives from it")->capture_default_str();
  app.add_option("--out", f.global.out_dir,
                 std::string("Output directory (default: $") + kOutputDirEnv + " or the current directory)");
  app.add_option("--threads", f.global.threads, "Worker threads for likelihood evaluation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  Commands c{};
  c.simulate = app.add_subcommand("simulate", "Simulate an agent; write observations.csv, truth.json, states.jsonl");
  auto& s = f.simulate;
  c.simulate
      ->add_option("--agent", s.agent,
                   "Agent: rational|flip|softmax|deceptive, optionally prefixed abrupt- or gradual- "
                   "(e.g. gradual-softmax)")
      ->capture_default_str();
  c.simulate->add_option("--sigma", s.sigma, "Execution skill sigma_x,sigma_y,rho in mm (random if omitted)");
  c.simulate->add_option("--sigma-initial", s.sigma_initial, "Starting skill of a dynamic agent (random if omitted)");
  c.simulate->add_option("--sigma-final", s.sigma_final, "Final skill of a dynamic agent (random if omitted)");
  c.simulate->add_option("--change-step", s.change_step, "Observation index of an abrupt change (random if omitted)");
  c.simulate->add_option("--lambda", s.lambda,
                         "Decision parameter: softmax rationality, flip or deceptive fraction (random if omitted)");
  c.simulate->add_option("--n", s.n, "Number of observations")->check(CLI::PositiveNumber)->capture_default_str();
  c.simulate->add_option("--resolution", s.resolution, "Action grid resolution in mm")->capture_default_str();
  c.simulate->add_flag("--shuffle-bull", s.shuffle_bull, "Randomly swap the bull and outer-bull values per state");
  c.simulate->add_flag("--zero-noise", s.zero_noise, "Record target actions without execution noise");

  c.estimate = app.add_subcommand("estimate", "Estimate skill from an observation file; write trace CSV and JSON");
  auto& e = f.estimate;
  c.estimate->add_option("--obs", e.obs, "Observation CSV (obs_index,state_id,x,y)")->required();
  c.estimate->add_option("--states", e.states, "States JSONL (default: states.jsonl next to --obs)");
  c.estimate->add_option("--truth", e.truth, "Truth JSON for per-step JD (default: truth.json next to --obs, if present)");
  c.estimate->add_option("--method", e.method, "Estimator")->check(CLI::IsMember({"mcse", "jeeds"}))->capture_default_str();
  c.estimate->add_option("--resolution", e.resolution, "Action grid resolution in mm (default: from truth, else 5)");
  c.estimate->add_option("--trace", e.trace, "Trace CSV path (default: <out>/trace_<method>.csv)");
  c.estimate->add_option("--final", e.final_json, "Final estimate JSON path (default: <out>/estimate_<method>.json)");
  e.filter.add(c.estimate);

  c.sweep = app.add_subcommand("sweep", "Parameter sweeps over the 9-agent tuning roster");
  auto& w = f.sweep;
  c.sweep->add_option("--round", w.round, "tuning: 18 (w%, r, strategy) configs; particles: particle counts; both")
      ->check(CLI::IsMember({"tuning", "particles", "both"}))
      ->capture_default_str();
  c.sweep->add_option("--seeds", w.seeds, "Seeds per configuration (seed, seed+1, ...)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c.sweep->add_option("--n", w.n, "Observations per run")->check(CLI::PositiveNumber)->capture_default_str();
  c.sweep->add_option("--resolution", w.resolution, "Action grid resolution in mm")->capture_default_str();
  c.sweep->add_option("--workers", w.workers, "Concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
  c.sweep->add_flag("--runs", w.runs, "Also write the long-form per-observation CSV");

  c.baseball = app.add_subcommand("baseball", "Estimate pitcher execution skill from pitch locations");
  auto& b = f.baseball;
  c.baseball->add_option("--data", b.data, "Delimited pitch file");
  c.baseball->add_option("--synthetic", b.synthetic, "Instead of --data: synthetic pitcher sigma_x,sigma_z,rho in ft");
  c.baseball->add_option("--n-pitches", b.n_pitches, "Pitches for --synthetic")->capture_default_str();
  c.baseball->add_option("--pitcher", b.pitcher, "Only this pitcher id");
  c.baseball->add_option("--pitch-type", b.pitch_type, "Pitch type code to keep (empty keeps all)")->capture_default_str();
  c.baseball->add_option("--min-count", b.min_count, "Minimum pitches per pitcher")->capture_default_str();
  c.baseball->add_option("--col-pitcher", b.col_pitcher, "Pitcher id column")->capture_default_str();
  c.baseball->add_option("--col-pitch-type", b.col_pitch_type, "Pitch type column")->capture_default_str();
  c.baseball->add_option("--col-x", b.col_x, "Horizontal location column (ft)")->capture_default_str();
  c.baseball->add_option("--col-z", b.col_z, "Vertical location column (ft)")->capture_default_str();
  c.baseball->add_option("--delimiter", b.delimiter, "Field delimiter")->capture_default_str();
  c.baseball->add_option("--method", b.method, "Estimator")
      ->check(CLI::IsMember({"mcse", "jeeds", "both"}))
      ->capture_default_str();
  c.baseball->add_option("--resolution", b.resolution, "Pitch grid resolution in ft")->capture_default_str();
  c.baseball->add_option("--zone-half-width", b.zone_half_width, "Strike zone half width (ft)")->capture_default_str();
  c.baseball->add_option("--zone-low", b.zone_low, "Strike zone bottom (ft)")->capture_default_str();
  c.baseball->add_option("--zone-high", b.zone_high, "Strike zone top (ft)")->capture_default_str();
  c.baseball->add_option("--samples", b.samples, "Monte Carlo samples for the strike-zone probability")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c.baseball->add_option("--mass", b.mass, "Probability mass of the plotted ellipses")->capture_default_str();
  b.filter.add(c.baseball);

  c.plot = app.add_subcommand("plot", "Render SVG plots from traces or estimate files");
  auto& p = f.plot;
  c.plot->add_option("--trace", p.traces, "Trace CSV, optionally label=path; traces sharing a label are averaged");
  c.plot->add_option("--estimate", p.estimates, "Estimate JSON, optionally label=path; drawn as confidence ellipses");
  c.plot->add_option("--svg", p.out, "Output SVG (default: <out>/jd.svg or <out>/ellipses.svg)");
  c.plot->add_option("--title", p.title, "Plot title");
  c.plot->add_option("--mass", p.mass, "Ellipse probability mass")->capture_default_str();
  c.plot->add_option("--zone", p.zone, "Rectangle x_lo,x_hi,y_lo,y_hi drawn under the ellipses");

  c.validate = app.add_subcommand("validate-config", "Check a JSON config file against every subcommand's flags");
  c.validate->add_option("--file", f.validate.file, "Config file to check")->required();
  return c;
}

fs::path output_dir(const Global& g) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

std::pair<std::string, std::string> split_label(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq != std::string::npos) return {arg.substr(0, eq), arg.substr(eq + 1)};
  return {fs::path(arg).stem().string(), arg};
}

// simulate

AgentSpec build_agent(const SimulateFlags& s, std::uint64_t seed) {
  std::string kind = s.agent;
  std::optional<DynamicsKind> dynamics;
  for (auto [prefix, d] : {std::pair{"abrupt-", DynamicsKind::Abrupt}, std::pair{"gradual-", DynamicsKind::Gradual}})
    if (kind.rfind(prefix, 0) == 0) {
      dynamics = d;
      kind = kind.substr(std::string(prefix).size());
    }
  AgentSpec a;
  a.id = s.agent;
  RngStream rng(seed, "agent-skill");
  if (s.lambda) {
    a.decision = {parse_decision_kind(kind), *s.lambda};
    a.decision.validate();
  } else {
    a.decision = random_decision(parse_decision_kind(kind), rng);
  }
  if (!dynamics) {
    if (!s.sigma_initial.empty() || !s.sigma_final.empty() || s.change_step)
      throw InvalidParameter("--sigma-initial/--sigma-final/--change-step need an abrupt- or gradual- agent");
    a.skill = Stationary{s.sigma.empty() ? random_skill(SkillRanges{}, rng) : parse_skill(s.sigma, "--sigma")};
    return a;
  }
  if (!s.sigma.empty()) throw InvalidParameter("dynamic agents take --sigma-initial and --sigma-final, not --sigma");
  SkillSchedule drawn = random_dynamic_schedule(*dynamics, s.n, rng);
  auto pick = [](const std::string& text, const char* flag, ExecutionSkillParams fallback) {
    return text.empty() ? fallback : parse_skill(text, flag);
  };
  if (*dynamics == DynamicsKind::Abrupt) {
    auto d = std::get<Abrupt>(drawn);
    d.initial = pick(s.sigma_initial, "--sigma-initial", d.initial);
    d.final_skill = pick(s.sigma_final, "--sigma-final", d.final_skill);
    if (s.change_step) {
      if (*s.change_step >= s.n) throw InvalidParameter("--change-step must be below --n");
      d.change_step = *s.change_step;
    }
    a.skill = d;
  } else {
    if (s.change_step) throw InvalidParameter("--change-step applies to abrupt agents only");
    auto d = std::get<Gradual>(drawn);
    d.initial = pick(s.sigma_initial, "--sigma-initial", d.initial);
    d.final_skill = pick(s.sigma_final, "--sigma-final", d.final_skill);
    a.skill = d;
  }
  return a;
}

int cmd_simulate(const Flags& f) {
  const auto& s = f.simulate;
  const std::uint64_t seed = f.global.seed;
  const AgentSpec agent = build_agent(s, seed);
  darts::StateOptions opts;
  opts.shuffle_bull = s.shuffle_bull;
  const auto states = generate_states(seed, s.n, opts);
  const ActionGrid grid = darts::board_grid(s.resolution, opts.geometry);
  const ValueFieldEngine engine(grid);
  RngStream targets = RngStream::derived(seed, "agent-targets", 0);
  RngStream noise(seed, "agent-noise");
  std::vector<Observation> obs;
  json per_obs = json::array();
  for (std::size_t i = 0; i < s.n; ++i) {
    const RewardGrid reward = darts::rasterize_reward(states[i], grid);
    obs.push_back(step(agent, reward, i, s.n, engine, targets, noise, {s.zero_noise}));
    auto j = to_json(current_skill(agent.skill, i, s.n));
    j["obs_index"] = i;
    per_obs.push_back(j);
  }
  const fs::path dir = output_dir(f.global);
  {
    auto os = io::open_output(dir / "observations.csv");
    io::write_observations(os, obs);
  }
  {
    auto os = io::open_output(dir / "states.jsonl");
    io::write_states(os, states);
  }
  json truth = {{"seed", seed},
                {"n_observations", s.n},
                {"resolution", s.resolution},
                {"shuffle_bull", s.shuffle_bull},
                {"geometry", darts::to_json(opts.geometry)},
                {"agent", to_json(agent)},
                {"lambda", agent.decision.lambda},
                {"skill_per_observation", per_obs}};
  io::write_json(dir / "truth.json", truth);
  std::cerr << "wrote " << s.n << " observations to " << (dir / "observations.csv").string() << "\n";
  return 0;
}

// estimate

int cmd_estimate(const Flags& f) {
  const auto& e = f.estimate;
  const fs::path obs_path = e.obs;
  const fs::path sibling = obs_path.has_parent_path() ? obs_path.parent_path() : fs::path(".");
  const fs::path states_path = e.states.empty() ? sibling / "states.jsonl" : fs::path(e.states);
  std::optional<json> truth;
  if (!e.truth.empty()) truth = io::read_json(e.truth);
  else if (fs::exists(sibling / "truth.json")) truth = io::read_json(sibling / "truth.json");

  std::vector<Observation> obs;
  {
    auto is = io::open_input(obs_path);
    obs = io::read_observations(is);
  }
  if (obs.empty()) throw DataError("observation file has no rows");
  darts::BoardGeometry geometry;
  double resolution = 5.0;
  std::vector<ExecutionSkillParams> true_skill;
  if (truth) {
    try {
      if (truth->contains("geometry")) geometry = darts::geometry_from_json(truth->at("geometry"));
      resolution = truth->value("resolution", resolution);
      for (const auto& row : truth->at("skill_per_observation")) true_skill.push_back(skill_from_json(row));
    } catch (const json::exception& ex) {
      throw DataError(std::string("truth file does not match the schema: ") + ex.what());
    }
    if (true_skill.size() != obs.size()) throw DataError("truth file and observations differ in length");
  }
  if (e.resolution) resolution = *e.resolution;

  std::map<std::int64_t, RewardGrid> rewards;
  const ActionGrid grid = darts::board_grid(resolution, geometry);
  {
    auto is = io::open_input(states_path);
    for (const auto& s : io::read_states(is, geometry)) rewards.emplace(s.state_id, darts::rasterize_reward(s, grid));
  }
  const ValueFieldEngine engine(grid, std::max<std::size_t>(512, rewards.size() + 1));
  auto reward_for = [&](const Observation& o) -> const RewardGrid& {
    auto it = rewards.find(o.state_id);
    if (it == rewards.end()) throw DataError("no state with id " + std::to_string(o.state_id));
    return it->second;
  };

  std::vector<io::TraceRow> trace;
  SkillEstimate final_est;
  std::size_t degenerate = 0;
  auto record = [&](std::size_t i, const SkillEstimate& est, double neff, bool resampled) {
    io::TraceRow r{i, est.sigma_x, est.sigma_y, est.rho, est.lambda, neff, resampled, std::nullopt};
    if (!true_skill.empty()) r.jd = jeffreys(true_skill[i], est.skill());
    trace.push_back(r);
  };
  json config;
  if (e.method == "mcse") {
    const FilterConfig cfg = e.filter.config(f.global.seed, f.global.threads);
    config = to_json(cfg);
    ParticleFilter filter(cfg, engine);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto& rep = filter.update(reward_for(obs[i]), obs[i].executed);
      record(i, rep.estimate, rep.neff, rep.resampled);
    }
    final_est = filter.estimate();
    degenerate = filter.degenerate_events();
  } else {
    jeeds::JeedsConfig cfg;
    config = {{"sigma_levels", cfg.sigma_count}, {"lambda_levels", cfg.lambda_count}};
    jeeds::JeedsEstimator est(cfg, engine);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      est.update(reward_for(obs[i]), obs[i].executed);
      record(i, est.estimate(), jeeds::belief_effective_fraction(est.grid()), false);
    }
    final_est = est.estimate();
    degenerate = est.degenerate_events();
  }

  const fs::path dir = output_dir(f.global);
  const fs::path trace_path = e.trace.empty() ? dir / ("trace_" + e.method + ".csv") : fs::path(e.trace);
  const fs::path final_path = e.final_json.empty() ? dir / ("estimate_" + e.method + ".json") : fs::path(e.final_json);
  {
    auto os = io::open_output(trace_path);
    io::write_trace(os, trace);
  }
  json out = {{"method", e.method},
              {"n_observations", obs.size()},
              {"sigma_x", final_est.sigma_x},
              {"sigma_y", final_est.sigma_y},
              {"rho", final_est.rho},
              {"lambda", final_est.lambda},
              {"gv", generalized_variance(final_est.covariance())},
              {"degenerate_events", degenerate},
              {"config", config}};
  if (!trace.empty() && trace.back().jd) out["final_jd"] = *trace.back().jd;
  io::write_json(final_path, out);
  return 0;
}

// sweep

int cmd_sweep(const Flags& f) {
  const auto& w = f.sweep;
  SweepSpec spec;
  for (std::size_t i = 0; i < w.seeds; ++i) spec.seeds.push_back(f.global.seed + i);
  spec.n_observations = w.n;
  spec.resolution = w.resolution;
  spec.workers = w.workers;
  FilterConfig base;
  base.threads = f.global.threads;
  const fs::path dir = output_dir(f.global);
  json manifest = {{"schema_version", kRunCsvVersion},
                   {"seed", f.global.seed},
                   {"seeds", w.seeds},
                   {"n_observations", w.n},
                   {"resolution", w.resolution},
                   {"roster", json::array()}};
  for (const auto& a : tuning_roster()) manifest["roster"].push_back(to_json(a));
  auto run = [&](const std::string& name, std::vector<SweepEntry> entries) {
    spec.entries = std::move(entries);
    RunRecord record;
    const auto rows = parameter_sweep(spec, w.runs ? &record : nullptr);
    auto os = io::open_output(dir / ("sweep_" + name + ".csv"));
    write_sweep_csv(os, rows);
    if (w.runs) {
      auto rs = io::open_output(dir / ("sweep_" + name + "_runs.csv"));
      write_run_csv(rs, record);
    }
    manifest["outputs"].push_back("sweep_" + name + ".csv");
    std::cerr << name << ": " << rows.size() << " configurations ranked\n";
  };
  if (w.round == "tuning" || w.round == "both") run("tuning", round1_entries(base));
  if (w.round == "particles" || w.round == "both") run("particles", particle_count_entries(base));
  io::write_json(dir / "sweep_manifest.json", manifest);
  return 0;
}

// baseball

int cmd_baseball(const Flags& f) {
  const auto& b = f.baseball;
  baseball::PitchModel model;
  model.zone = {b.zone_half_width, b.zone_low, b.zone_high};
  model.resolution = b.resolution;
  model.validate();
  if (!(b.mass > 0.0 && b.mass < 1.0)) throw InvalidParameter("--mass must lie in (0, 1)");
  if (b.data.empty() == b.synthetic.empty()) throw InvalidParameter("give exactly one of --data and --synthetic");

  std::map<std::string, std::vector<baseball::PitchRecord>> pitchers;
  if (!b.synthetic.empty()) {
    const auto skill = parse_skill(b.synthetic, "--synthetic");
    RngStream rng(f.global.seed, "synthetic-pitches");
    const std::string id = b.pitcher.empty() ? "synthetic" : b.pitcher;
    pitchers[id] = baseball::synthetic_pitches(id, covariance(skill), model.zone.center(), b.n_pitches, rng);
  } else {
    if (b.delimiter.size() != 1) throw InvalidParameter("--delimiter must be one character");
    baseball::IngestOptions opts;
    opts.columns = {b.col_pitcher, b.col_pitch_type, b.col_x, b.col_z};
    if (!b.pitcher.empty()) opts.pitcher = b.pitcher;
    opts.pitch_type = b.pitch_type.empty() ? std::nullopt : std::optional<std::string>(b.pitch_type);
    opts.min_count = b.pitcher.empty() ? 0 : b.min_count;
    opts.delimiter = b.delimiter[0];
    const auto ingested = baseball::ingest_pitches(b.data, opts);
    if (!ingested.dropped.empty()) {
      std::cerr << "dropped " << ingested.dropped.size() << " rows";
      for (std::size_t i = 0; i < std::min<std::size_t>(3, ingested.dropped.size()); ++i)
        std::cerr << (i ? "; " : " (") << ingested.dropped[i];
      std::cerr << (ingested.dropped.size() > 3 ? "; ...)" : ")") << "\n";
    }
    for (auto& [id, recs] : baseball::by_pitcher(ingested.records)) {
      if (recs.size() < b.min_count) {
        std::cerr << "skipping pitcher " << id << ": " << recs.size() << " pitches\n";
        continue;
      }
      pitchers[id] = std::move(recs);
    }
    if (pitchers.empty())
      throw DataError("insufficient data: no pitcher has at least " + std::to_string(b.min_count) + " pitches");
  }

  std::vector<EstimatorSpec> estimators;
  if (b.method != "jeeds")
    estimators.push_back({"mcse", EstimatorKind::Mcse,
                          baseball::pitch_filter_config(model, b.filter.config(f.global.seed, f.global.threads)), {}});
  if (b.method != "mcse")
    estimators.push_back({"jeeds", EstimatorKind::Jeeds, {}, baseball::pitch_jeeds_config(model)});

  const fs::path dir = output_dir(f.global);
  json results = json::array();
  for (const auto& [id, recs] : pitchers) {
    std::vector<svg::LabeledEllipse> ellipses;
    for (const auto& est : estimators) {
      const auto r = baseball::estimate_pitcher(recs, est, model, f.global.seed, b.samples);
      results.push_back(baseball::to_json(r));
      ellipses.push_back({est.id, baseball::confidence_ellipse(r.estimate.covariance(), b.mass, model.zone.center())});
    }
    auto os = io::open_output(dir / ("ellipse_" + id + ".svg"));
    os << svg::ellipse_plot("Pitcher " + id + ": " + io::format_number(100 * b.mass) + "% ellipses", ellipses,
                            model.zone.rect());
  }
  io::write_json(dir / "baseball.json", results);
  return 0;
}

// plot

int cmd_plot(const Flags& f) {
  const auto& p = f.plot;
  if (p.traces.empty() && p.estimates.empty()) throw InvalidParameter("plot needs --trace or --estimate inputs");
  if (!p.traces.empty() && !p.estimates.empty()) throw InvalidParameter("plot either traces or estimates, not both");
  const fs::path dir = output_dir(f.global);
  if (!p.traces.empty()) {
    std::vector<std::string> order;
    std::map<std::string, std::map<std::size_t, MeanAccumulator>> acc;
    for (const auto& arg : p.traces) {
      auto [label, path] = split_label(arg);
      auto is = io::open_input(path);
      const auto rows = io::read_trace(is);
      if (rows.empty()) throw DataError("trace '" + path + "' has no rows");
      if (!acc.count(label)) order.push_back(label);
      for (const auto& r : rows) {
        if (!r.jd) throw DataError("trace '" + path + "' has no JD column values; estimate with a truth file");
        acc[label][r.obs_index].add(*r.jd);
      }
    }
    std::vector<svg::Series> series;
    for (const auto& label : order) {
      svg::Series s{label, {}};
      for (const auto& [i, a] : acc[label]) s.points.push_back({static_cast<double>(i + 1), a.mean()});
      series.push_back(std::move(s));
    }
    const fs::path out = p.out.empty() ? dir / "jd.svg" : fs::path(p.out);
    auto os = io::open_output(out);
    os << svg::line_plot(p.title.empty() ? "Mean JD per observation" : p.title, "Observation", "Mean JD (nats)", series);
    return 0;
  }
  std::vector<svg::LabeledEllipse> ellipses;
  for (const auto& arg : p.estimates) {
    auto [label, path] = split_label(arg);
    const json j = io::read_json(path);
    auto add = [&](const json& e, const std::string& name) {
      ExecutionSkillParams s;
      try {
        s = {e.at("sigma_x").get<double>(), e.at("sigma_y").get<double>(), e.at("rho").get<double>()};
      } catch (const json::exception& ex) {
        throw DataError("estimate '" + path + "' lacks sigma_x/sigma_y/rho: " + ex.what());
      }
      Vec2 center{};
      if (e.contains("center")) center = {e["center"].at(0).get<double>(), e["center"].at(1).get<double>()};
      ellipses.push_back({name, baseball::confidence_ellipse(covariance(s), p.mass, center)});
    };
    if (j.is_array()) {
      for (const auto& e : j)
        add(e, e.value("pitcher", label) + " " + e.value("estimator", std::string()));
    } else {
      add(j, label);
    }
  }
  std::optional<Rect> zone;
  if (!p.zone.empty()) {
    const auto z = parse_list(p.zone, 4, "--zone");
    zone = Rect{z[0], z[1], z[2], z[3]};
  }
  const fs::path out = p.out.empty() ? dir / "ellipses.svg" : fs::path(p.out);
  auto os = io::open_output(out);
  os << svg::ellipse_plot(p.title.empty() ? io::format_number(100 * p.mass) + "% confidence ellipses" : p.title,
                          ellipses, zone, "x", "y");
  return 0;
}

// validate-config: parse the file against a fresh copy of the flag tree, then
// check the values each section would produce.
int cmd_validate(const Flags& f) {
  const std::string file = f.validate.file;
  if (!fs::exists(file)) throw DataError("cannot open '" + file + "'");
  const json j = io::read_json(file);
  if (!j.is_object()) throw InvalidParameter("config must be a JSON object");
  Flags g;
  CLI::App app{"mcse"};
  build_app(app, g);
  try {
    app.parse(std::vector<std::string>{file, "--file", "validate-config", file, "--config"});
  } catch (const CLI::ParseError& e) {
    throw InvalidParameter(std::string("config rejected: ") + e.what());
  }
  std::vector<std::string> checked;
  if (j.contains("simulate")) {
    build_agent(g.simulate, g.global.seed);
    checked.push_back("simulate");
  }
  if (j.contains("estimate")) {
    g.estimate.filter.config(g.global.seed, g.global.threads);
    checked.push_back("estimate");
  }
  if (j.contains("baseball")) {
    g.baseball.filter.config(g.global.seed, g.global.threads);
    baseball::StrikeZone{g.baseball.zone_half_width, g.baseball.zone_low, g.baseball.zone_high}.validate();
    checked.push_back("baseball");
  }
  if (j.contains("sweep")) {
    if (!(g.sweep.resolution > 0.0)) throw InvalidParameter("sweep resolution must be positive");
    checked.push_back("sweep");
  }
  std::cout << "ok";
  for (const auto& c : checked) std::cout << " " << c;
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo skill estimation: simulate agents, estimate execution and decision skill"};
  app.name("mcse");
  Flags flags;
  const Commands cmd = build_app(app, flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  try {
    if (cmd.simulate->parsed()) return cmd_simulate(flags);
    if (cmd.estimate->parsed()) return cmd_estimate(flags);
    if (cmd.sweep->parsed()) return cmd_sweep(flags);
    if (cmd.baseball->parsed()) return cmd_baseball(flags);
    if (cmd.plot->parsed()) return cmd_plot(flags);
    if (cmd.validate->parsed()) return cmd_validate(flags);
  } catch (const DegenerateFilter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidObservation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
