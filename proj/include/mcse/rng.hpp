#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "mcse/linalg.hpp"

namespace mcse {

// 64-bit FNV-1a; used only to turn stream names into seed material.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// A named, deterministic random stream. Two streams built from the same
// (seed, name) pair produce identical sequences; streams with different
// names are statistically independent.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view name) {
    const std::uint64_t h = fnv1a(name);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    engine_.seed(seq);
  }

  // Sub-stream of this stream's seed space, e.g. one per agent.
  static RngStream derived(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    return RngStream(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)), name);
  }

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  double normal() { return normal_(engine_); }
  Vec2 normal2() {
    const double a = normal_(engine_);
    const double b = normal_(engine_);
    return {a, b};
  }
  // Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(n) - 1)); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mcse
