#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcse/error.hpp"
#include "mcse/grid.hpp"
#include "mcse/rng.hpp"

namespace mcse::darts {

inline constexpr int kSectorCount = 20;

// Standard board order, clockwise from the top sector.
inline constexpr std::array<int, kSectorCount> kStandardSectors = {20, 1,  18, 4, 13, 6,  10, 15, 2,  17,
                                                                    3,  19, 7,  16, 8, 11, 14, 9,  12, 5};

// Board radii in mm. Region boundaries belong to the outer region.
struct BoardGeometry {
  double bull_radius = 6.35;
  double outer_bull_radius = 15.9;
  double treble_inner = 99.0;
  double treble_outer = 107.0;
  double double_inner = 162.0;
  double double_outer = 170.0;
  int sector_count = kSectorCount;
  double bull_value = 50.0;
  double outer_bull_value = 25.0;

  double board_radius() const { return double_outer; }

  void validate() const {
    const bool ordered = 0.0 < bull_radius && bull_radius < outer_bull_radius && outer_bull_radius < treble_inner &&
                         treble_inner < treble_outer && treble_outer < double_inner && double_inner < double_outer;
    if (!ordered) throw InvalidParameter("board radii must be strictly increasing and positive");
    if (sector_count != kSectorCount) throw InvalidParameter("board must have 20 sectors");
  }
};

struct DartboardState {
  std::int64_t state_id = 0;
  std::array<int, kSectorCount> sector_values = kStandardSectors;
  // Only differ from the geometry defaults when bull shuffling is enabled.
  double bull_value = 50.0;
  double outer_bull_value = 25.0;
  BoardGeometry geometry{};
};

struct StateOptions {
  BoardGeometry geometry{};
  // Also randomize which of the two bull regions holds the larger value.
  bool shuffle_bull = false;
};

inline DartboardState generate_state(std::int64_t state_id, RngStream& rng, const StateOptions& options = {}) {
  options.geometry.validate();
  DartboardState s;
  s.state_id = state_id;
  s.geometry = options.geometry;
  std::array<int, kSectorCount> values{};
  for (int i = 0; i < kSectorCount; ++i) values[i] = i + 1;
  std::shuffle(values.begin(), values.end(), rng.engine());
  s.sector_values = values;
  s.bull_value = options.geometry.bull_value;
  s.outer_bull_value = options.geometry.outer_bull_value;
  if (options.shuffle_bull && rng.uniform() < 0.5) std::swap(s.bull_value, s.outer_bull_value);
  return s;
}

// Sector index of a point: 0 is the top sector spanning [-9, 9) degrees
// measured clockwise from vertical.
inline int sector_index(Vec2 p, int sector_count = kSectorCount) {
  const double width = 360.0 / sector_count;
  double degrees = std::atan2(p.x, p.y) * 180.0 / std::numbers::pi + 0.5 * width;
  degrees = std::fmod(degrees, 360.0);
  if (degrees < 0.0) degrees += 360.0;
  int idx = static_cast<int>(std::floor(degrees / width));
  return idx >= sector_count ? idx - sector_count : idx;
}

inline double reward_at(const DartboardState& s, Vec2 p) {
  const auto& g = s.geometry;
  const double r = p.norm();
  if (!(r < g.double_outer)) return 0.0;
  if (r < g.bull_radius) return s.bull_value;
  if (r < g.outer_bull_radius) return s.outer_bull_value;
  const double base = s.sector_values[static_cast<std::size_t>(sector_index(p, g.sector_count))];
  if (r < g.treble_inner) return base;
  if (r < g.treble_outer) return 3.0 * base;
  if (r < g.double_inner) return base;
  return 2.0 * base;
}

// Square target grid covering the board's bounding square.
inline ActionGrid board_grid(double resolution, const BoardGeometry& geometry = {}) {
  return ActionGrid(resolution, geometry.board_radius());
}

inline RewardGrid rasterize_reward(const DartboardState& s, const ActionGrid& grid) {
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = reward_at(s, grid.cell(i));
  return make_reward_grid(grid, std::move(values), s.state_id);
}

// One JSON record per state; geometry travels separately.
inline nlohmann::json to_json(const DartboardState& s) {
  nlohmann::json j;
  j["state_id"] = s.state_id;
  j["sector_values"] = s.sector_values;
  if (s.bull_value != s.geometry.bull_value || s.outer_bull_value != s.geometry.outer_bull_value) {
    j["bull_value"] = s.bull_value;
    j["outer_bull_value"] = s.outer_bull_value;
  }
  return j;
}

inline DartboardState state_from_json(const nlohmann::json& j, const BoardGeometry& geometry = {}) {
  DartboardState s;
  s.geometry = geometry;
  s.state_id = j.at("state_id").get<std::int64_t>();
  const auto values = j.at("sector_values").get<std::vector<int>>();
  if (values.size() != kSectorCount) throw DataError("sector_values must hold 20 entries");
  std::array<bool, kSectorCount + 1> seen{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int v = values[i];
    if (v < 1 || v > kSectorCount || seen[static_cast<std::size_t>(v)])
      throw DataError("sector_values must be a permutation of 1..20");
    seen[static_cast<std::size_t>(v)] = true;
    s.sector_values[i] = v;
  }
  s.bull_value = j.value("bull_value", geometry.bull_value);
  s.outer_bull_value = j.value("outer_bull_value", geometry.outer_bull_value);
  return s;
}

inline nlohmann::json to_json(const BoardGeometry& g) {
  return {{"bull_radius", g.bull_radius},   {"outer_bull_radius", g.outer_bull_radius},
          {"treble_inner", g.treble_inner}, {"treble_outer", g.treble_outer},
          {"double_inner", g.double_inner}, {"double_outer", g.double_outer},
          {"sector_count", g.sector_count}, {"bull_value", g.bull_value},
          {"outer_bull_value", g.outer_bull_value}};
}

inline BoardGeometry geometry_from_json(const nlohmann::json& j) {
  BoardGeometry g;
  g.bull_radius = j.value("bull_radius", g.bull_radius);
  g.outer_bull_radius = j.value("outer_bull_radius", g.outer_bull_radius);
  g.treble_inner = j.value("treble_inner", g.treble_inner);
  g.treble_outer = j.value("treble_outer", g.treble_outer);
  g.double_inner = j.value("double_inner", g.double_inner);
  g.double_outer = j.value("double_outer", g.double_outer);
  g.sector_count = j.value("sector_count", g.sector_count);
  g.bull_value = j.value("bull_value", g.bull_value);
  g.outer_bull_value = j.value("outer_bull_value", g.outer_bull_value);
  g.validate();
  return g;
}

}  // namespace mcse::darts
