#include "qmloc/targets.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "qmloc/error.hpp"

namespace qmloc {

CoefficientMesh hexagon_mesh(double eps) {
  QMLOC_THROW_IF(!(eps > 0.0 && eps <= 1.0), ErrorCode::ParameterOutOfRange, "eps must lie in (0, 1]");
  std::vector<Point2> v{{0, 0}, {1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};
  std::vector<std::array<Id, 3>> t{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 5, 6}, {0, 6, 1}};
  Triangulation mesh = Triangulation::build(std::move(v), std::move(t));
  const double e2 = eps * eps;
  Coefficient a = Coefficient::attach(mesh, {1.0, e2, e2, 1.0, e2, e2});
  return {std::move(mesh), std::move(a)};
}

HexagonTarget::HexagonTarget(double eps) : eps_(eps) {
  QMLOC_THROW_IF(!(eps >= 1e-3 && eps <= 0.5), ErrorCode::ParameterOutOfRange, "eps outside [1e-3, 0.5]");
}

double HexagonTarget::rho(double r) const {
  if (r < eps_) return (1.0 - eps_) * std::pow(r / eps_, eps_);
  if (r <= 1.0) return 1.0 - r;
  return 0.0;
}

double HexagonTarget::rho_prime(double r) const {
  if (r <= 0.0) return 0.0;
  if (r < eps_) return eps_ * rho(r) / r;
  if (r <= 1.0) return -1.0;
  return 0.0;
}

void HexagonTarget::upper(const Point2& x, double& v, Vec2& g) const {
  const Point2 p{x.x, x.y == 0.0 ? 0.0 : x.y};  // keeps atan2 off -pi for y = -0
  const double r = norm(p);
  const double theta = std::atan2(p.y, p.x);
  const Vec2 er = (1.0 / r) * p;
  const Vec2 et{-er.y, er.x};
  if (theta > kPi / 2.0) {
    const double ang = 3.0 - 4.0 * theta / kPi;
    v = rho(r) * ang;
    g = rho_prime(r) * ang * er + (rho(r) * (-4.0 / kPi) / r) * et;
    return;
  }
  if (r < eps_) {
    v = rho(r);
    g = rho_prime(r) * er;
    return;
  }
  const double c = std::cos(theta), s = std::sin(theta);
  const double sum = c + s;
  const double w = 1.0 - p.x - p.y;
  const double denom = 1.0 - eps_ * sum;
  const double h = (sum - 1.0) / denom;
  const double dh = (c - s) * (1.0 - eps_) / (denom * denom);
  v = w + eps_ * h * w;
  const Vec2 grad_w{-1.0, -1.0};
  const Vec2 grad_theta = (1.0 / r) * et;
  g = grad_w + eps_ * (h * grad_w + (w * dh) * grad_theta);
}

double HexagonTarget::value(const Point2& p) const {
  constexpr double tol = 1e-14;
  if (std::abs(p.x) > 1.0 + tol || std::abs(p.y) > 1.0 + tol || std::abs(p.x + p.y) > 1.0 + tol) return 0.0;
  if (p.x == 0.0 && p.y == 0.0) return 0.0;
  double v = 0.0;
  Vec2 g;
  if (p.y >= 0.0) {
    upper(p, v, g);
    return v;
  }
  upper(-1.0 * p, v, g);
  return -v;
}

Vec2 HexagonTarget::gradient(const Point2& p) const {
  constexpr double tol = 1e-14;
  if (std::abs(p.x) > 1.0 + tol || std::abs(p.y) > 1.0 + tol || std::abs(p.x + p.y) > 1.0 + tol) return {0.0, 0.0};
  if (p.x == 0.0 && p.y == 0.0) return {0.0, 0.0};
  double v = 0.0;
  Vec2 g;
  if (p.y >= 0.0) {
    upper(p, v, g);
  } else {
    upper(-1.0 * p, v, g);  // u(p) = -u(-p) leaves the gradient unchanged
  }
  return g;
}

std::vector<SingularPoint> HexagonTarget::singular_points() const { return {{{0.0, 0.0}, eps_, {eps_, 1.0}}}; }

HexagonEnergyReference analytic_energy_reference(double eps) {
  QMLOC_THROW_IF(!(eps > 0.0 && eps < 1.0), ErrorCode::ParameterOutOfRange, "eps must lie in (0, 1)");
  HexagonEnergyReference r;
  const double q = (1.0 - eps) * (1.0 - eps);
  r.grad_rho_ball = kPi * eps * q;
  r.rho_sq_over_r = q / (2.0 * eps) - 1.5 - std::log(eps) + 2.0 * eps - 0.5 * eps * eps;
  r.rho_sq_over_r_bound = 1.0 / (2.0 * eps) - std::log(eps);
  const double radial = q * eps / 2.0 + (1.0 - eps * eps) / 2.0;
  r.energy_k2_k3 = eps * eps * ((kPi / 6.0) * radial + (8.0 / kPi) * r.rho_sq_over_r);
  return r;
}

CoefficientMesh checkerboard_mesh(int n) {
  QMLOC_THROW_IF(n < 1 || n > 1000, ErrorCode::ParameterOutOfRange, "N must lie in [1, 1000]");
  const int m = 2 * n;
  const double h = 1.0 / m;
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>((m + 1) * (m + 1)));
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) v.push_back({i * h, j * h});
  }
  auto id = [m](int i, int j) { return static_cast<Id>(j * (m + 1) + i); };
  std::vector<std::array<Id, 3>> t;
  std::vector<double> a;
  const double black = 1.0 / (static_cast<double>(n) * n);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const Id bl = id(i, j), br = id(i + 1, j), tl = id(i, j + 1), tr = id(i + 1, j + 1);
      t.push_back({bl, br, tl});
      t.push_back({br, tr, tl});
      const double value = (i + j) % 2 == 1 ? black : 1.0;
      a.push_back(value);
      a.push_back(value);
    }
  }
  Triangulation mesh = Triangulation::build(std::move(v), std::move(t));
  Coefficient c = Coefficient::attach(mesh, std::move(a));
  return {std::move(mesh), std::move(c)};
}

CheckerboardTarget::CheckerboardTarget(int n)
    : n_(n), cell_((n >= 2 && n <= 1000) ? 1.0 / n : 0.5) {
  QMLOC_THROW_IF(n < 2 || n > 1000, ErrorCode::ParameterOutOfRange, "N must lie in [2, 1000]");
}

bool CheckerboardTarget::locate(const Point2& x, Point2& local) const {
  if (x.x < 0.0 || x.x > 1.0 || x.y < 0.0 || x.y > 1.0) return false;
  const int i = std::clamp(static_cast<int>(std::floor(x.x * n_)), 0, n_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(x.y * n_)), 0, n_ - 1);
  const Point2 c{(2 * i + 1) / (2.0 * n_), (2 * j + 1) / (2.0 * n_)};
  local = (2.0 * n_) * (x - c);
  return true;
}

double CheckerboardTarget::value(const Point2& x) const {
  Point2 local;
  if (!locate(x, local)) return 0.0;
  return cell_.value(local) / n_;
}

Vec2 CheckerboardTarget::gradient(const Point2& x) const {
  Point2 local;
  if (!locate(x, local)) return {0.0, 0.0};
  return 2.0 * cell_.gradient(local);
}

std::vector<SingularPoint> CheckerboardTarget::singular_points() const {
  std::vector<SingularPoint> out;
  const double eps = 1.0 / n_;
  const double scale = 1.0 / (2.0 * n_);
  for (const Point2& c : antisymmetry_centers()) out.push_back({c, eps, {eps * scale, scale}});
  return out;
}

std::vector<Point2> CheckerboardTarget::antisymmetry_centers() const {
  std::vector<Point2> out;
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) out.push_back({(2 * i + 1) / (2.0 * n_), (2 * j + 1) / (2.0 * n_)});
  }
  return out;
}

namespace {

CoefficientMesh four_triangles(const std::array<double, 4>& values) {
  std::vector<Point2> v{{0, 0}, {1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
  std::vector<std::array<Id, 3>> t{{0, 4, 1}, {0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
  Triangulation mesh = Triangulation::build(std::move(v), std::move(t));
  Coefficient a = Coefficient::attach(mesh, {values.begin(), values.end()});
  return {std::move(mesh), std::move(a)};
}

}  // namespace

CoefficientMesh graded_quadrants(double m) {
  QMLOC_THROW_IF(!(m > 0.0) || !std::isfinite(m), ErrorCode::ParameterOutOfRange, "M must be positive");
  return four_triangles({m / 2.0, 1.0, m, 3.0 * m / 4.0});
}

CoefficientMesh alternating_quadrants(double m) {
  QMLOC_THROW_IF(!(m > 0.0) || !std::isfinite(m), ErrorCode::ParameterOutOfRange, "M must be positive");
  return four_triangles({m, 1.0, m, 1.0});
}

CoefficientMesh layered_quadrants(double alpha) {
  QMLOC_THROW_IF(!(alpha > 0.0 && alpha <= 1.0), ErrorCode::ParameterOutOfRange, "alpha must lie in (0, 1]");
  return four_triangles({std::cbrt(alpha * alpha), alpha, 1.0, std::cbrt(alpha)});
}

CoefficientMesh refine(const CoefficientMesh& coarse, int levels) {
  QMLOC_THROW_IF(levels < 0 || levels > 10, ErrorCode::ParameterOutOfRange, "refinement levels must lie in [0, 10]");
  CoefficientMesh out{coarse.mesh, coarse.a};
  for (int l = 0; l < levels; ++l) {
    Triangulation fine = uniform_refine(out.mesh);
    out.a = out.a.refined(fine);
    out.mesh = std::move(fine);
  }
  return out;
}

const std::vector<std::string>& smooth_target_names() {
  static const std::vector<std::string> names{"sin", "exp", "harmonic-cos"};
  return names;
}

std::unique_ptr<Field> smooth_target(const std::string& name) {
  if (name == "sin") {
    return std::make_unique<FunctionField>(
        [](const Point2& p) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); },
        [](const Point2& p) {
          return Vec2{kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y), kPi * std::sin(kPi * p.x) * std::cos(kPi * p.y)};
        });
  }
  if (name == "exp") {
    return std::make_unique<FunctionField>([](const Point2& p) { return std::exp(p.x + 0.5 * p.y); },
                                           [](const Point2& p) {
                                             const double e = std::exp(p.x + 0.5 * p.y);
                                             return Vec2{e, 0.5 * e};
                                           });
  }
  if (name == "harmonic-cos") {
    return std::make_unique<FunctionField>(
        [](const Point2& p) { return p.x * p.x * p.x - 3.0 * p.x * p.y * p.y + std::cos(2.0 * p.y); },
        [](const Point2& p) {
          return Vec2{3.0 * p.x * p.x - 3.0 * p.y * p.y, -6.0 * p.x * p.y - 2.0 * std::sin(2.0 * p.y)};
        });
  }
  throw Error(ErrorCode::InvalidInput, "unknown target '" + name + "'");
}

std::unique_ptr<Field> random_trig_field(std::uint64_t seed, int terms) {
  QMLOC_THROW_IF(terms < 1, ErrorCode::InvalidInput, "need at least one term");
  struct Term {
    double c, p, q, s;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), freq(-3.0, 3.0), phase(0.0, 2.0 * kPi);
  std::vector<Term> t;
  for (int k = 0; k < terms; ++k) {
    const double c = coef(rng), p = freq(rng), q = freq(rng), s = phase(rng);
    t.push_back({c, p, q, s});
  }
  return std::make_unique<FunctionField>(
      [t](const Point2& x) {
        double v = 0.0;
        for (const auto& k : t) v += k.c * std::sin(k.p * x.x + k.q * x.y + k.s);
        return v;
      },
      [t](const Point2& x) {
        Vec2 g{0.0, 0.0};
        for (const auto& k : t) {
          const double d = k.c * std::cos(k.p * x.x + k.q * x.y + k.s);
          g = g + Vec2{d * k.p, d * k.q};
        }
        return g;
      });
}

}  // namespace qmloc
