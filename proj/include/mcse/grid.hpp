#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "mcse/error.hpp"
#include "mcse/linalg.hpp"

namespace mcse {

// Square lattice of candidate actions. Cell centers sit at
// center + (i - h, j - h) * resolution for i, j in [0, side), h = (side - 1) / 2,
// so the grid is symmetric about its center and contains the center itself.
// Cells are indexed row-major: index = row * side + col, row along y.
class ActionGrid {
 public:
  ActionGrid() = default;
  ActionGrid(double resolution, double half_extent, Vec2 center = {})
      : resolution_(resolution), half_extent_(half_extent), center_(center) {
    if (!(resolution > 0.0) || !std::isfinite(resolution))
      throw InvalidParameter("grid resolution must be positive");
    if (!(half_extent >= 0.0) || !std::isfinite(half_extent))
      throw InvalidParameter("grid half extent must be non-negative");
    half_cells_ = static_cast<int>(std::floor(half_extent / resolution + 1e-9));
    side_ = 2 * half_cells_ + 1;
  }

  double resolution() const { return resolution_; }
  double half_extent() const { return half_extent_; }
  Vec2 center() const { return center_; }
  int side() const { return side_; }
  int half_cells() const { return half_cells_; }
  std::size_t size() const { return static_cast<std::size_t>(side_) * static_cast<std::size_t>(side_); }
  double cell_area() const { return resolution_ * resolution_; }

  Vec2 cell(int row, int col) const {
    return {center_.x + (col - half_cells_) * resolution_, center_.y + (row - half_cells_) * resolution_};
  }
  Vec2 cell(std::size_t index) const {
    return cell(static_cast<int>(index / side_), static_cast<int>(index % side_));
  }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(side_) + static_cast<std::size_t>(col);
  }

  // Index of the cell whose area contains `p`, or -1 when `p` is off the grid.
  std::int64_t locate(Vec2 p) const {
    const auto col = static_cast<std::int64_t>(std::floor((p.x - center_.x) / resolution_ + 0.5)) + half_cells_;
    const auto row = static_cast<std::int64_t>(std::floor((p.y - center_.y) / resolution_ + 0.5)) + half_cells_;
    if (col < 0 || row < 0 || col >= side_ || row >= side_) return -1;
    return row * side_ + col;
  }

  bool same_lattice(const ActionGrid& other) const {
    return resolution_ == other.resolution_ && side_ == other.side_ && center_ == other.center_;
  }

 private:
  double resolution_ = 1.0;
  double half_extent_ = 0.0;
  Vec2 center_{};
  int half_cells_ = 0;
  int side_ = 1;
};

// Reward of every grid cell for one state. `key` identifies the state for
// caching; `fingerprint` is a content hash that guards against key reuse.
struct RewardGrid {
  ActionGrid grid;
  std::vector<double> values;
  std::int64_t key = 0;
  std::uint64_t fingerprint = 0;

  double max() const {
    double m = values.empty() ? 0.0 : values.front();
    for (double v : values) m = v > m ? v : m;
    return m;
  }
  double min() const {
    double m = values.empty() ? 0.0 : values.front();
    for (double v : values) m = v < m ? v : m;
    return m;
  }
};

inline std::uint64_t fingerprint_values(const std::vector<double>& values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    h ^= bits;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline RewardGrid make_reward_grid(ActionGrid grid, std::vector<double> values, std::int64_t key) {
  if (values.size() != grid.size()) throw InvalidParameter("reward values do not match grid size");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidParameter("reward values must be finite");
  RewardGrid out{grid, std::move(values), key, 0};
  out.fingerprint = fingerprint_values(out.values);
  return out;
}

}  // namespace mcse
