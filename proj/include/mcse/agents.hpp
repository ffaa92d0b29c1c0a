#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcse/error.hpp"
#include "mcse/noise.hpp"
#include "mcse/rng.hpp"
#include "mcse/value_field.hpp"

namespace mcse {

enum class DecisionKind { Rational, Flip, Softmax, Deceptive };

inline std::string_view to_string(DecisionKind k) {
  switch (k) {
    case DecisionKind::Rational: return "rational";
    case DecisionKind::Flip: return "flip";
    case DecisionKind::Softmax: return "softmax";
    case DecisionKind::Deceptive: return "deceptive";
  }
  return "unknown";
}

inline DecisionKind parse_decision_kind(std::string_view s) {
  if (s == "rational") return DecisionKind::Rational;
  if (s == "flip") return DecisionKind::Flip;
  if (s == "softmax") return DecisionKind::Softmax;
  if (s == "deceptive") return DecisionKind::Deceptive;
  throw InvalidParameter("unknown decision model '" + std::string(s) + "'");
}

// Decision-making component. `lambda` is the flip probability, the softmax
// rationality, or the deceptive value fraction; Rational ignores it.
struct DecisionModel {
  DecisionKind kind = DecisionKind::Rational;
  double lambda = 1.0;

  void validate() const {
    switch (kind) {
      case DecisionKind::Rational: return;
      case DecisionKind::Flip:
      case DecisionKind::Deceptive:
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("flip/deceptive lambda must lie in [0, 1]");
        return;
      case DecisionKind::Softmax:
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("softmax lambda must be finite and >= 0");
        return;
    }
  }
};

// Rationality ranges used when drawing random agents.
struct RationalityRanges {
  Range flip{0.0, 1.0};
  Range softmax{0.001, 32.0};
  Range deceptive{0.0, 1.0};
};

inline DecisionModel random_decision(DecisionKind kind, RngStream& rng, const RationalityRanges& ranges = {}) {
  switch (kind) {
    case DecisionKind::Rational: return {kind, 0.0};
    case DecisionKind::Flip: return {kind, rng.uniform(ranges.flip.lo, ranges.flip.hi)};
    case DecisionKind::Softmax: return {kind, rng.uniform(ranges.softmax.lo, ranges.softmax.hi)};
    case DecisionKind::Deceptive: return {kind, rng.uniform(ranges.deceptive.lo, ranges.deceptive.hi)};
  }
  return {kind, 0.0};
}

struct Stationary {
  ExecutionSkillParams skill{};
};
// Skill switches from `initial` to `final_skill` at observation `change_step`.
struct Abrupt {
  ExecutionSkillParams initial{};
  ExecutionSkillParams final_skill{};
  std::size_t change_step = 0;
};
// Skill moves linearly from `initial` (first observation) to `final_skill` (last).
struct Gradual {
  ExecutionSkillParams initial{};
  ExecutionSkillParams final_skill{};
};
using SkillSchedule = std::variant<Stationary, Abrupt, Gradual>;

struct AgentSpec {
  std::string id;
  DecisionModel decision{};
  SkillSchedule skill{Stationary{}};
};

// What an estimator sees: the state and the executed action, never the target.
struct Observation {
  std::int64_t state_id = 0;
  Vec2 executed{};
};

inline ExecutionSkillParams current_skill(const SkillSchedule& schedule, std::size_t obs_index, std::size_t n) {
  if (n == 0 || obs_index >= n) throw InvalidParameter("observation index out of range");
  return std::visit(
      [&](const auto& s) -> ExecutionSkillParams {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Stationary>) {
          return s.skill;
        } else if constexpr (std::is_same_v<T, Abrupt>) {
          return obs_index < s.change_step ? s.initial : s.final_skill;
        } else {
          if (n == 1) return s.initial;
          const double t = static_cast<double>(obs_index) / static_cast<double>(n - 1);
          auto lerp = [t](double a, double b) { return a + t * (b - a); };
          return {lerp(s.initial.sigma_x, s.final_skill.sigma_x), lerp(s.initial.sigma_y, s.final_skill.sigma_y),
                  lerp(s.initial.rho, s.final_skill.rho)};
        }
      },
      schedule);
}

inline ExecutionSkillParams random_skill(const SkillRanges& ranges, RngStream& rng) {
  const double sx = rng.uniform(ranges.sigma.lo, ranges.sigma.hi);
  const double sy = rng.uniform(ranges.sigma.lo, ranges.sigma.hi);
  const double rho = rng.uniform(ranges.rho.lo, ranges.rho.hi);
  return {sx, sy, rho};
}

enum class DynamicsKind { Stationary, Abrupt, Gradual };

struct DynamicSkillOptions {
  Range accurate{8.0, 15.0};
  Range inaccurate{130.0, 145.0};
  Range rho{-0.75, 0.75};
  // Use one correlation for both endpoints instead of one per endpoint.
  bool shared_rho = false;
};

// Observation index at which an abrupt agent switches: uniform over the
// middle third, {floor(n/3), ..., floor(2n/3)}.
inline std::size_t draw_change_step(std::size_t n, RngStream& rng) {
  const auto lo = static_cast<std::int64_t>(n / 3);
  const auto hi = static_cast<std::int64_t>((2 * n) / 3);
  return static_cast<std::size_t>(rng.integer(lo, hi));
}

// Endpoint skills drawn from the accurate and inaccurate ranges, in random order.
inline SkillSchedule random_dynamic_schedule(DynamicsKind kind, std::size_t n, RngStream& rng,
                                             const DynamicSkillOptions& options = {}) {
  auto draw = [&](const Range& r) { return ExecutionSkillParams{rng.uniform(r.lo, r.hi), rng.uniform(r.lo, r.hi), 0.0}; };
  ExecutionSkillParams good = draw(options.accurate);
  ExecutionSkillParams bad = draw(options.inaccurate);
  good.rho = rng.uniform(options.rho.lo, options.rho.hi);
  bad.rho = options.shared_rho ? good.rho : rng.uniform(options.rho.lo, options.rho.hi);
  const bool improving = rng.uniform() < 0.5;
  const ExecutionSkillParams initial = improving ? bad : good;
  const ExecutionSkillParams final_skill = improving ? good : bad;
  switch (kind) {
    case DynamicsKind::Stationary: return Stationary{initial};
    case DynamicsKind::Abrupt: return Abrupt{initial, final_skill, draw_change_step(n, rng)};
    case DynamicsKind::Gradual: return Gradual{initial, final_skill};
  }
  return Stationary{initial};
}

// P(t) proportional to exp(lambda V_t) over the grid cells, shifted by the
// maximum so that large lambda never overflows.
inline std::vector<double> softmax_distribution(const ValueField& field, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("softmax lambda must be finite and >= 0");
  std::vector<double> p(field.values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(lambda * (field.values[i] - field.max_value));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

inline std::size_t sample_index(const std::vector<double>& probabilities, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // Rounding left the total just below one; fall back to the last cell with mass.
  for (std::size_t i = probabilities.size(); i-- > 0;)
    if (probabilities[i] > 0.0) return i;
  return 0;
}

// Among cells with V >= fraction * max V, the one farthest from the optimal cell.
inline std::size_t deceptive_cell(const ValueField& field, double fraction) {
  const double cutoff = fraction * field.max_value;
  const Vec2 best = optimal_action(field);
  std::size_t chosen = field.argmax_cell;
  double farthest = -1.0;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    if (field.values[i] < cutoff && i != field.argmax_cell) continue;
    const double d = (field.grid.cell(i) - best).norm();
    if (d > farthest) {
      farthest = d;
      chosen = i;
    }
  }
  return chosen;
}

// `field` must be computed for the agent's true current skill.
inline Vec2 select_target(const DecisionModel& decision, const ValueField& field, RngStream& rng) {
  decision.validate();
  switch (decision.kind) {
    case DecisionKind::Rational: return optimal_action(field);
    case DecisionKind::Flip:
      if (rng.uniform() < decision.lambda) return optimal_action(field);
      return field.grid.cell(rng.index(field.grid.size()));
    case DecisionKind::Softmax: return field.grid.cell(sample_index(softmax_distribution(field, decision.lambda), rng));
    case DecisionKind::Deceptive: return field.grid.cell(deceptive_cell(field, decision.lambda));
  }
  return optimal_action(field);
}

struct StepOptions {
  bool zero_noise = false;
};

// One interaction: aim, then add a perturbation drawn from `noise`. Every
// agent consumes exactly one standard-normal pair per step, so agents fed
// copies of the same noise stream receive the same perturbation sequence.
inline Observation step(const AgentSpec& agent, const RewardGrid& reward, std::size_t obs_index, std::size_t n,
                        const ValueFieldEngine& engine, RngStream& targets, RngStream& noise,
                        const StepOptions& options = {}) {
  const ExecutionSkillParams skill = current_skill(agent.skill, obs_index, n);
  const ValueField field = engine.compute(reward, skill);
  const Vec2 target = select_target(agent.decision, field, targets);
  const Vec2 z = noise.normal2();
  const Vec2 perturbation = BivariateNormal(skill).transform(z);
  return {reward.key, options.zero_noise ? target : target + perturbation};
}

// JSON

inline nlohmann::json to_json(const ExecutionSkillParams& p) {
  return {{"sigma_x", p.sigma_x}, {"sigma_y", p.sigma_y}, {"rho", p.rho}};
}

inline ExecutionSkillParams skill_from_json(const nlohmann::json& j) {
  ExecutionSkillParams p{j.at("sigma_x").get<double>(), j.at("sigma_y").get<double>(), j.value("rho", 0.0)};
  p.validate();
  return p;
}

inline nlohmann::json to_json(const SkillSchedule& s) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Stationary>) {
          auto j = to_json(v.skill);
          j["dynamics"] = "stationary";
          return j;
        } else if constexpr (std::is_same_v<T, Abrupt>) {
          return {{"dynamics", "abrupt"},
                  {"initial", to_json(v.initial)},
                  {"final", to_json(v.final_skill)},
                  {"change_step", v.change_step}};
        } else {
          return {{"dynamics", "gradual"}, {"initial", to_json(v.initial)}, {"final", to_json(v.final_skill)}};
        }
      },
      s);
}

inline SkillSchedule schedule_from_json(const nlohmann::json& j) {
  const std::string dyn = j.value("dynamics", "stationary");
  if (dyn == "stationary") return Stationary{skill_from_json(j)};
  if (dyn == "abrupt")
    return Abrupt{skill_from_json(j.at("initial")), skill_from_json(j.at("final")), j.at("change_step").get<std::size_t>()};
  if (dyn == "gradual") return Gradual{skill_from_json(j.at("initial")), skill_from_json(j.at("final"))};
  throw InvalidParameter("unknown dynamics '" + dyn + "'");
}

inline nlohmann::json to_json(const AgentSpec& a) {
  return {{"id", a.id},
          {"decision", {{"kind", std::string(to_string(a.decision.kind))}, {"lambda", a.decision.lambda}}},
          {"skill", to_json(a.skill)}};
}

inline AgentSpec agent_from_json(const nlohmann::json& j) {
  AgentSpec a;
  a.id = j.value("id", "agent");
  const auto& d = j.at("decision");
  a.decision.kind = parse_decision_kind(d.at("kind").get<std::string>());
  a.decision.lambda = d.value("lambda", 0.0);
  a.decision.validate();
  a.skill = schedule_from_json(j.at("skill"));
  return a;
}

}  // namespace mcse
