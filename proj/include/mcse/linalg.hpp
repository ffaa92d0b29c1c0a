#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "mcse/error.hpp"

namespace mcse {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  constexpr double det() const { return xx * yy - xy * xy; }
  constexpr double trace() const { return xx + yy; }

  bool is_spd() const {
    return std::isfinite(xx) && std::isfinite(xy) && std::isfinite(yy) && xx > 0.0 && det() > 0.0;
  }

  Sym2 inverse() const {
    const double d = det();
    if (!(d != 0.0) || !std::isfinite(d)) throw InvalidParameter("singular 2x2 matrix");
    return {yy / d, -xy / d, xx / d};
  }

  constexpr Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

  // v^T M v
  constexpr double quad(Vec2 v) const { return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y; }

  friend constexpr Sym2 operator*(double s, Sym2 m) { return {s * m.xx, s * m.xy, s * m.yy}; }
  friend constexpr bool operator==(const Sym2&, const Sym2&) = default;
};

// trace(A * B) for symmetric A, B.
constexpr double trace_product(const Sym2& a, const Sym2& b) {
  return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy;
}

// Lower-triangular Cholesky factor [[l11, 0], [l21, l22]].
struct Cholesky2 {
  double l11 = 0.0;
  double l21 = 0.0;
  double l22 = 0.0;

  constexpr Vec2 apply(Vec2 z) const { return {l11 * z.x, l21 * z.x + l22 * z.y}; }
};

inline Cholesky2 cholesky(const Sym2& m) {
  if (!m.is_spd()) throw InvalidParameter("matrix is not symmetric positive definite");
  const double l11 = std::sqrt(m.xx);
  const double l21 = m.xy / l11;
  const double l22 = std::sqrt(m.yy - l21 * l21);
  return {l11, l21, l22};
}

// Eigen-decomposition of a symmetric 2x2 matrix. Eigenvalues are sorted
// major >= minor; `major_axis` is the unit eigenvector of the major value.
struct SymEigen2 {
  double major = 0.0;
  double minor = 0.0;
  Vec2 major_axis{1.0, 0.0};
  Vec2 minor_axis{0.0, 1.0};
};

inline SymEigen2 eigen(const Sym2& m) {
  const double mean = 0.5 * (m.xx + m.yy);
  const double half_diff = 0.5 * (m.xx - m.yy);
  const double radius = std::hypot(half_diff, m.xy);
  SymEigen2 out;
  out.major = mean + radius;
  out.minor = mean - radius;
  const double angle = 0.5 * std::atan2(2.0 * m.xy, m.xx - m.yy);
  out.major_axis = {std::cos(angle), std::sin(angle)};
  out.minor_axis = {-std::sin(angle), std::cos(angle)};
  return out;
}

}  // namespace mcse
