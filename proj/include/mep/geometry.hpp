#pragma once

#include <array>
#include <cmath>

namespace mep {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
constexpr double norm_sq(Vec2 a) { return dot(a, a); }

/// Transverse-magnetic cross product v × Ω with Ω = Ω ê₃: [v₂, −v₁]ᵀ Ω.
constexpr Vec2 cross_tm(Vec2 v, double omega) { return {v.y * omega, -v.x * omega}; }

/// 2x2 matrix in column-major order (a c; b d).
struct Mat2 {
  double a = 0, b = 0, c = 0, d = 0;  // [[a, c], [b, d]]

  constexpr Vec2 apply(Vec2 v) const { return {a * v.x + c * v.y, b * v.x + d * v.y}; }
  constexpr double det() const { return a * d - b * c; }
  constexpr Mat2 inverse_transpose() const {
    const double idet = 1.0 / det();
    // inv = 1/det [[d, -c], [-b, a]]; transpose of that.
    return Mat2{d * idet, -c * idet, -b * idet, a * idet};
  }
};

}  // namespace mep
