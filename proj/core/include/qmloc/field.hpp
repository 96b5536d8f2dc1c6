#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qmloc/geometry.hpp"

namespace qmloc {

/// A point where a target's gradient blows up like r^(exponent - 1).
/// `radial_breaks` are radii (measured from `center`) across which the
/// radial profile is only piecewise smooth.
struct SingularPoint {
  Point2 center;
  double exponent = 1.0;
  std::vector<double> radial_breaks;
};

/// Scalar target function with closed-form gradient.
class Field {
 public:
  virtual ~Field() = default;

  [[nodiscard]] virtual double value(const Point2& x) const = 0;
  [[nodiscard]] virtual Vec2 gradient(const Point2& x) const = 0;

  [[nodiscard]] virtual std::vector<SingularPoint> singular_points() const { return {}; }

  /// Centers c with u(c + d) = -u(c - d) on the field's declared domain.
  [[nodiscard]] virtual std::vector<Point2> antisymmetry_centers() const { return {}; }
};

class FunctionField final : public Field {
 public:
  using ValueFn = std::function<double(const Point2&)>;
  using GradientFn = std::function<Vec2(const Point2&)>;

  FunctionField(ValueFn value, GradientFn gradient) : value_(std::move(value)), gradient_(std::move(gradient)) {}

  [[nodiscard]] double value(const Point2& x) const override { return value_(x); }
  [[nodiscard]] Vec2 gradient(const Point2& x) const override { return gradient_(x); }

 private:
  ValueFn value_;
  GradientFn gradient_;
};

}  // namespace qmloc
