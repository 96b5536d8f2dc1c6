#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace qmloc {

using Id = std::uint32_t;
inline constexpr Id kNoId = std::numeric_limits<Id>::max();

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2& operator+=(const Point2& o) noexcept { x += o.x; y += o.y; return *this; }
  constexpr Point2& operator-=(const Point2& o) noexcept { x -= o.x; y -= o.y; return *this; }
  constexpr Point2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }
  friend constexpr bool operator==(const Point2&, const Point2&) = default;
};

using Vec2 = Point2;

constexpr Point2 operator+(Point2 a, const Point2& b) noexcept { return a += b; }
constexpr Point2 operator-(Point2 a, const Point2& b) noexcept { return a -= b; }
constexpr Point2 operator-(const Point2& a) noexcept { return {-a.x, -a.y}; }
constexpr Point2 operator*(double s, Point2 a) noexcept { return a *= s; }
constexpr Point2 operator*(Point2 a, double s) noexcept { return a *= s; }

constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) noexcept { return std::hypot(a.x, a.y); }
constexpr double norm_sq(const Vec2& a) noexcept { return dot(a, a); }
inline double distance(const Point2& a, const Point2& b) noexcept { return norm(a - b); }

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace qmloc
