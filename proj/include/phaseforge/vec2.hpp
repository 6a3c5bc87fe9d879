#pragma once

#include <cmath>

namespace phaseforge {

// Cross-section coordinates: x is horizontal (image right), z is depth.
struct Vec2 {
  double x = 0.0;
  double z = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, z + o.z}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, z - o.z}; }
  constexpr Vec2 operator*(double s) const { return {x * s, z * s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.z - a.z * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.z); }
inline Vec2 normalized(Vec2 v) { return v * (1.0 / norm(v)); }

// Clockwise quarter turn. For a forward axis (0, 1) this is (1, 0): image right.
constexpr Vec2 right_of(Vec2 v) { return {v.z, -v.x}; }

// Rotate toward right_of(v) by `angle` radians.
inline Vec2 rotate_right(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return v * c + right_of(v) * s;
}

// Signed angle from `from` to `to`, positive toward right_of(from).
inline double signed_angle(Vec2 from, Vec2 to) {
  return std::atan2(dot(to, right_of(from)), dot(to, from));
}

}  // namespace phaseforge
