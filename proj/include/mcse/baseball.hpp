#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcse/harness.hpp"
#include "mcse/io.hpp"
#include "mcse/jeeds.hpp"
#include "mcse/mcse.hpp"
#include "mcse/metrics.hpp"

namespace mcse::baseball {

// Plate coordinates in feet, catcher's view: x horizontal, z height.
struct PitchRecord {
  std::string pitcher_id;
  std::string pitch_type;
  double plate_x = 0.0;
  double plate_z = 0.0;
};

inline const std::set<std::string>& known_pitch_types() {
  static const std::set<std::string> codes = {"AB", "CH", "CS", "CU", "EP", "FA", "FC", "FF", "FO", "FS", "FT",
                                              "IN", "KC", "KN", "PO", "SC", "SI", "SL", "ST", "SV", "UN"};
  return codes;
}

struct StrikeZone {
  double x_half_width = 0.83;
  double z_low = 1.5;
  double z_high = 3.5;

  void validate() const {
    if (!(x_half_width > 0.0)) throw InvalidParameter("strike zone half width must be positive");
    if (!(z_low < z_high)) throw InvalidParameter("strike zone needs z_low < z_high");
  }
  Rect rect() const { return {-x_half_width, x_half_width, z_low, z_high}; }
  Vec2 center() const { return {0.0, 0.5 * (z_low + z_high)}; }
};

struct ColumnMap {
  std::string pitcher = "pitcher";
  std::string pitch_type = "pitch_type";
  std::string plate_x = "plate_x";
  std::string plate_z = "plate_z";
};

struct IngestOptions {
  ColumnMap columns{};
  std::optional<std::string> pitcher;
  std::optional<std::string> pitch_type = std::string("FF");
  std::size_t min_count = 100;
  char delimiter = ',';
};

struct IngestResult {
  std::vector<PitchRecord> records;
  std::vector<std::string> dropped;  // one note per rejected row
};

// Single pass over a delimited file. Rows with missing or non-finite
// coordinates or an unknown pitch type are dropped and noted.
inline IngestResult ingest_pitches(std::istream& is, const IngestOptions& options = {}) {
  IngestResult out;
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(is, line))
    if (!line.empty() && line != "\r") header = io::split_line(line, options.delimiter);
  if (header.empty()) throw DataError("pitch file is empty");
  if (header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw DataError("missing column '" + name + "'");
  };
  const auto cp = col(options.columns.pitcher), ct = col(options.columns.pitch_type), cx = col(options.columns.plate_x),
             cz = col(options.columns.plate_z);

  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = io::split_line(line, options.delimiter);
    f.resize(header.size());
    PitchRecord r{f[cp], f[ct], 0.0, 0.0};
    if (options.pitcher && r.pitcher_id != *options.pitcher) continue;
    if (options.pitch_type && r.pitch_type != *options.pitch_type) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!known_pitch_types().count(r.pitch_type)) {
      out.dropped.push_back(where + ": unknown pitch type '" + r.pitch_type + "'");
      continue;
    }
    try {
      r.plate_x = io::parse_number(f[cx]);
      r.plate_z = io::parse_number(f[cz]);
    } catch (const DataError&) {
      out.dropped.push_back(where + ": missing or malformed coordinates");
      continue;
    }
    if (!std::isfinite(r.plate_x) || !std::isfinite(r.plate_z)) {
      out.dropped.push_back(where + ": non-finite coordinates");
      continue;
    }
    out.records.push_back(std::move(r));
  }
  if (out.records.size() < options.min_count)
    throw DataError("insufficient data: " + std::to_string(out.records.size()) + " pitches, need at least " +
                    std::to_string(options.min_count));
  return out;
}

inline IngestResult ingest_pitches(const std::filesystem::path& path, const IngestOptions& options = {}) {
  auto is = io::open_input(path);
  return ingest_pitches(is, options);
}

// Grouped by pitcher id, in id order.
inline std::map<std::string, std::vector<PitchRecord>> by_pitcher(const std::vector<PitchRecord>& records) {
  std::map<std::string, std::vector<PitchRecord>> out;
  for (const auto& r : records) out[r.pitcher_id].push_back(r);
  return out;
}

struct PitchModel {
  StrikeZone zone{};
  double resolution = 0.1;      // feet
  double margin = 4.0;          // feet beyond the zone on every side
  SkillRanges ranges{{0.05, 1.0}, {-0.75, 0.75}, {0.001, 32.0}};

  void validate() const {
    zone.validate();
    if (!(resolution > 0.0)) throw InvalidParameter("pitch grid resolution must be positive");
    if (!(margin >= 0.0)) throw InvalidParameter("pitch grid margin must be non-negative");
  }
  ActionGrid grid() const {
    const double half = std::max(zone.x_half_width, 0.5 * (zone.z_high - zone.z_low)) + margin;
    return ActionGrid(resolution, half, zone.center());
  }
};

inline constexpr std::int64_t kPitchRewardKey = 0x5049544348;

// Binary reward: 1 inside the zone, 0 elsewhere.
inline RewardGrid build_pitch_reward(const PitchModel& model) {
  model.validate();
  const ActionGrid grid = model.grid();
  const Rect zone = model.zone.rect();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = zone.contains(grid.cell(i)) ? 1.0 : 0.0;
  return make_reward_grid(grid, std::move(values), kPitchRewardKey);
}

inline RewardGrid build_pitch_reward(const StrikeZone& zone, double resolution) {
  PitchModel m;
  m.zone = zone;
  m.resolution = resolution;
  return build_pitch_reward(m);
}

inline FilterConfig pitch_filter_config(const PitchModel& model, FilterConfig base = {}) {
  base.ranges = model.ranges;
  return base;
}

inline jeeds::JeedsConfig pitch_jeeds_config(const PitchModel& model, jeeds::JeedsConfig base = {}) {
  base.sigma = model.ranges.sigma;
  base.lambda = model.ranges.lambda;
  return base;
}

struct PitcherResult {
  std::string pitcher;
  std::size_t n_pitches = 0;
  std::string estimator;
  SkillEstimate estimate{};
  double gv = 0.0;  // ft^4
  ProbabilityEstimate strike_zone{};
};

// Every pitch is one observation against the same reward grid. Estimator
// ranges should come from pitch_filter_config / pitch_jeeds_config.
inline PitcherResult estimate_pitcher(const std::vector<PitchRecord>& records, const EstimatorSpec& spec,
                                      const PitchModel& model, std::uint64_t seed,
                                      std::size_t zone_samples = kStrikeZoneSamples) {
  if (records.empty()) throw DataError("no pitches to estimate from");
  const RewardGrid reward = build_pitch_reward(model);
  const ValueFieldEngine engine(reward.grid, 4);
  PitcherResult out;
  out.pitcher = records.front().pitcher_id;
  out.n_pitches = records.size();
  out.estimator = spec.id;
  try {
    if (spec.kind == EstimatorKind::Mcse) {
      FilterConfig cfg = spec.mcse;
      cfg.seed = seed;
      ParticleFilter filter(cfg, engine);
      for (const auto& r : records) filter.update(reward, {r.plate_x, r.plate_z});
      out.estimate = filter.estimate();
    } else {
      auto grid = jeeds::jeeds_init(spec.jeeds);
      for (const auto& r : records) jeeds::jeeds_update(grid, reward, engine, {r.plate_x, r.plate_z});
      out.estimate = jeeds::jeeds_estimate(grid);
    }
  } catch (const DegenerateFilter& e) {
    throw DegenerateFilter("pitcher " + out.pitcher + ": " + e.what());
  }
  const Sym2 cov = out.estimate.covariance();
  out.gv = generalized_variance(cov);
  RngStream rng(seed, "strike-zone");
  out.strike_zone = strike_zone_probability(cov, model.zone.center(), model.zone.rect(), zone_samples, rng);
  return out;
}

inline nlohmann::json to_json(const PitcherResult& r) {
  return {{"pitcher", r.pitcher},
          {"n_pitches", r.n_pitches},
          {"estimator", r.estimator},
          {"sigma_x", r.estimate.sigma_x},
          {"sigma_y", r.estimate.sigma_y},
          {"rho", r.estimate.rho},
          {"lambda", r.estimate.lambda},
          {"gv", r.gv},
          {"gv_units", "ft^4"},
          {"strike_zone_prob", r.strike_zone.probability},
          {"strike_zone_se", r.strike_zone.standard_error}};
}

// Pitches scattered around `aim` with a known covariance.
inline std::vector<PitchRecord> synthetic_pitches(const std::string& pitcher, const Sym2& cov, Vec2 aim, std::size_t n,
                                                  RngStream& rng) {
  const BivariateNormal noise(cov);
  std::vector<PitchRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = aim + noise.transform(rng.normal2());
    out.push_back({pitcher, "FF", p.x, p.y});
  }
  return out;
}

struct Ellipse {
  Vec2 center{};
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;  // radians from +x to the major axis
  double chi2 = 0.0;   // squared Mahalanobis radius of the boundary
};

// Quantile of the chi-square distribution with two degrees of freedom.
inline double chi2_2_quantile(double mass) {
  if (!(mass > 0.0 && mass < 1.0)) throw InvalidParameter("ellipse mass must lie in (0, 1)");
  return -2.0 * std::log1p(-mass);
}

inline Ellipse confidence_ellipse(const Sym2& cov, double mass, Vec2 center = {}) {
  if (!cov.is_spd()) throw InvalidParameter("confidence ellipse needs an SPD covariance");
  const double c = chi2_2_quantile(mass);
  const SymEigen2 e = eigen(cov);
  return {center, std::sqrt(c * e.major), std::sqrt(c * e.minor), std::atan2(e.major_axis.y, e.major_axis.x), c};
}

inline bool ellipse_contains(const Ellipse& e, Vec2 p) {
  const Vec2 d = p - e.center;
  const double ca = std::cos(e.angle), sa = std::sin(e.angle);
  const double u = (d.x * ca + d.y * sa) / e.semi_major;
  const double v = (-d.x * sa + d.y * ca) / e.semi_minor;
  return u * u + v * v <= 1.0;
}

}  // namespace mcse::baseball
