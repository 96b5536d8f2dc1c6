#pragma once

#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmloc/field.hpp"
#include "qmloc/mesh.hpp"

namespace qmloc {

struct QuadPoint {
  Point2 x;
  double weight = 0.0;
};

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const LineRule& gauss_legendre(int points);

/// Gauss-Jacobi rule on [0, 1] for the weight s^b, b > -1: sum_i w_i g(s_i)
/// approximates int_0^1 s^b g(s) ds.
LineRule gauss_jacobi(int points, double b);

/// Rule on the reference triangle conv{(0,0),(1,0),(0,1)}; weights sum to 1/2.
struct TriangleRule {
  int exactness = 0;
  std::vector<Point2> points;
  std::vector<double> weights;
};

/// Collapsed (conical product) Gauss rule exact for total degree `exactness`.
const TriangleRule& reference_triangle_rule(int exactness);

struct QuadratureOptions {
  double grading_ratio = 0.5;
  int radial_order = 12;
  int angular_order = 16;
  int angular_cells = 2;
  int min_levels = 4;
  int max_levels = 60;
  /// Relative change between the two finest grading levels that ends refinement.
  double rtol = 1e-8;
};

/// Integration rule for one element: either the plain triangle rule or a
/// polar composite rule around a singular point lying in the element closure.
struct ElementRule {
  enum class Kind { Plain, Polar };

  Kind kind = Kind::Plain;
  int exactness = 0;

  // Polar data. The element is fanned into sectors (center, p, q) and each
  // sector is integrated in (r, theta); the innermost radial segment is
  // geometrically graded toward the center with `levels` levels, and the last
  // cell uses a Gauss-Jacobi rule for the weight r^(2 exponent - 1). Segments
  // between radial breaks are split into cells of ratio 1 / grading_ratio.
  Point2 center;
  double exponent = 1.0;
  std::vector<double> radial_breaks;
  std::vector<std::array<Point2, 2>> sectors;
  int levels = 0;
};

class QuadraturePlan {
 public:
  QuadraturePlan() = default;
  QuadraturePlan(const Triangulation& mesh, std::vector<ElementRule> rules, QuadratureOptions options);

  [[nodiscard]] std::size_t num_elements() const noexcept { return rules_.size(); }
  [[nodiscard]] const ElementRule& rule(Id k) const { return rules_.at(k); }
  [[nodiscard]] const QuadratureOptions& options() const noexcept { return options_; }
  [[nodiscard]] const Triangulation& mesh() const;

  /// Physical quadrature points of element k (weights include the Jacobian).
  [[nodiscard]] std::vector<QuadPoint> points(Id k) const;
  void append_points(Id k, std::vector<QuadPoint>& out) const;

  /// Throws PlanMismatch unless the plan was built on `mesh`.
  void check_mesh(const Triangulation& mesh) const;

  [[nodiscard]] nlohmann::ordered_json to_json(bool include_points = false) const;

 private:
  const Triangulation* mesh_ = nullptr;
  std::vector<ElementRule> rules_;
  QuadratureOptions options_;
};

/// Plain rules of exactness >= `exactness` everywhere.
QuadraturePlan make_quadrature_plan(const Triangulation& mesh, int exactness);

/// Plain rules away from the target's singular points; polar rules on
/// elements whose closure contains one. The number of grading levels is
/// increased until the probe integral of u^2 + |grad u|^2 changes by less
/// than options.rtol (relative).
QuadraturePlan make_quadrature_plan(const Triangulation& mesh, const Field& target, int exactness,
                                    const QuadratureOptions& options = {});

using ScalarFn = std::function<double(const Point2&)>;

/// Sum of per-element quadratures over `region`, accumulated in ascending
/// element order.
double integrate(const ScalarFn& f, std::span<const Id> region, const QuadraturePlan& plan);
double integrate(const ScalarFn& f, const QuadraturePlan& plan);

}  // namespace qmloc
