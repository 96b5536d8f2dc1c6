#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qmloc/coefficient.hpp"
#include "qmloc/field.hpp"
#include "qmloc/mesh.hpp"

namespace qmloc {

/// A mesh bundled with a piecewise-constant coefficient on it. Spaces keep a
/// pointer to `mesh`, so keep the bundle alive and in place while using them.
struct CoefficientMesh {
  Triangulation mesh;
  Coefficient a;
};

/// Six triangles K1..K6 (ids 0..5) of the hexagon
/// {|x| <= 1, |y| <= 1, |x + y| <= 1} around the origin, with a = 1 on K1, K4
/// and eps^2 elsewhere. 0 < eps <= 1.
CoefficientMesh hexagon_mesh(double eps);

/// The antisymmetric target u_eps on the hexagon. On K1 outside B(0, eps) the
/// harmonic piece is replaced by the explicit w + eps * u~, which shares its
/// boundary data. Zero outside the hexagon. 1e-3 <= eps <= 0.5.
class HexagonTarget final : public Field {
 public:
  explicit HexagonTarget(double eps);

  [[nodiscard]] double eps() const noexcept { return eps_; }
  [[nodiscard]] double rho(double r) const;
  [[nodiscard]] double rho_prime(double r) const;

  [[nodiscard]] double value(const Point2& x) const override;
  [[nodiscard]] Vec2 gradient(const Point2& x) const override;
  [[nodiscard]] std::vector<SingularPoint> singular_points() const override;
  [[nodiscard]] std::vector<Point2> antisymmetry_centers() const override { return {{0.0, 0.0}}; }

 private:
  // Value and gradient on the half plane theta in [0, pi].
  void upper(const Point2& x, double& v, Vec2& g) const;

  double eps_;
};

/// Closed forms of three radial integrals of u_eps.
struct HexagonEnergyReference {
  double grad_rho_ball = 0.0;       // |grad rho|^2 over B(0, eps)
  double rho_sq_over_r = 0.0;       // int_0^1 rho^2 / r dr
  double rho_sq_over_r_bound = 0.0; // 1/(2 eps) - ln eps
  double energy_k2_k3 = 0.0;        // |a^(1/2) grad u_eps|^2 over K2 and K3
};
HexagonEnergyReference analytic_energy_reference(double eps);

/// Unit square cut into (2N)^2 squares of side 1/(2N), each split along its
/// top-left to bottom-right diagonal. Black squares (a = 1/N^2) are those
/// with odd column + row index; the top-left square is black.
CoefficientMesh checkerboard_mesh(int n);

/// U_N: on every macro square of side 1/N the rescaled hexagon target
/// u_{1/N}, scaled by 1/N. 2 <= N <= 1000.
class CheckerboardTarget final : public Field {
 public:
  explicit CheckerboardTarget(int n);

  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double value(const Point2& x) const override;
  [[nodiscard]] Vec2 gradient(const Point2& x) const override;
  [[nodiscard]] std::vector<SingularPoint> singular_points() const override;
  [[nodiscard]] std::vector<Point2> antisymmetry_centers() const override;

 private:
  // Macro square containing x and its local coordinates in [-1, 1]^2.
  bool locate(const Point2& x, Point2& local) const;

  int n_;
  HexagonTarget cell_;
};

/// Square [-1, 1]^2 as four triangles around the origin: bottom, right, top,
/// left (ids 0..3). Left variant: values M/2, 1, M, 3M/4. Right variant: M,
/// 1, M, 1.
CoefficientMesh graded_quadrants(double m);
CoefficientMesh alternating_quadrants(double m);

/// Four-region pattern with values alpha^(2/3), alpha, 1, alpha^(1/3) on the
/// bottom, right, top and left triangles, so min/max = alpha exactly and the
/// pattern is quasi-monotone for every alpha in (0, 1].
CoefficientMesh layered_quadrants(double alpha);

/// `levels` rounds of uniform refinement, coefficient carried along.
CoefficientMesh refine(const CoefficientMesh& coarse, int levels);

/// Smooth targets for robustness sweeps: "sin" = sin(pi x) sin(pi y),
/// "exp" = exp(x + y/2), "harmonic-cos" = x^3 - 3 x y^2 + cos(2y).
std::unique_ptr<Field> smooth_target(const std::string& name);
const std::vector<std::string>& smooth_target_names();

/// Random trigonometric polynomial sum c_k sin(p_k x + q_k y + s_k) with a
/// fixed seed.
std::unique_ptr<Field> random_trig_field(std::uint64_t seed, int terms = 6);

}  // namespace qmloc
