#pragma once

#include <cmath>

namespace billiard {

/// Plain 2D vector (double precision). Used both for positions in the plane
/// (scatterer centers, collision points) and for direction vectors.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator*(double c) const { return {x * c, y * c}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }

  constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
  constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
  double norm() const { return std::hypot(x, y); }
  constexpr double norm2() const { return x * x + y * y; }

  Vec2 normalized() const {
    const double n = norm();
    return {x / n, y / n};
  }

  /// Counterclockwise rotation by `angle`.
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
};

constexpr Vec2 operator*(double c, const Vec2& v) { return {c * v.x, c * v.y}; }

/// Signed angle from `a` to `b`, in (-pi, pi]. Counterclockwise positive.
inline double signed_angle(const Vec2& a, const Vec2& b) {
  return std::atan2(a.cross(b), a.dot(b));
}

}  // namespace billiard
