#include "qmloc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

#include <Eigen/Eigenvalues>

#include "qmloc/error.hpp"

namespace qmloc {

namespace {

// Legendre polynomial P_n(x) and its derivative.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double pn = n == 0 ? 1.0 : p1;
  const double pn1 = n == 1 ? 1.0 : p0;
  return {pn, n * (x * pn - pn1) / (x * x - 1.0)};
}

LineRule compute_gauss_legendre(int n) {
  LineRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    // Map [-1, 1] to [0, 1], ascending nodes.
    rule.nodes[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// Golub-Welsch for the Jacobi weight (1 - x)^0 (1 + x)^b, mapped to [0, 1].
LineRule compute_gauss_jacobi(int n, double b) {
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + b;
    jm(k, k) = k == 0 ? b / (b + 2.0) : (b * b) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double t = 2.0 * m + b;
      jm(k, k + 1) = jm(k + 1, k) = std::sqrt(4.0 * m * m * (m + b) * (m + b) / (t * t * (t + 1.0) * (t - 1.0)));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
  LineRule rule;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.nodes.push_back(0.5 * (1.0 + es.eigenvalues()[i]));
    rule.weights.push_back(v0 * v0);
    total += v0 * v0;
  }
  for (auto& w : rule.weights) w *= 1.0 / ((b + 1.0) * total);
  return rule;
}

TriangleRule compute_triangle_rule(int exactness) {
  const int n = std::max(1, (exactness + 3) / 2);
  const LineRule& g = gauss_legendre(n);
  TriangleRule rule;
  rule.exactness = exactness;
  for (int i = 0; i < n; ++i) {
    const double s = g.nodes[i];
    for (int j = 0; j < n; ++j) {
      const double t = g.nodes[j];
      rule.points.push_back({s, t * (1.0 - s)});
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - s));
    }
  }
  return rule;
}

template <typename T, typename Make>
const T& cached(std::map<int, T>& cache, std::mutex& m, int key, Make make) {
  std::lock_guard lock(m);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make(key)).first;
  return it->second;
}

// Barycentric coordinates of x in triangle (a, b, c).
std::array<double, 3> barycentric(const std::array<Point2, 3>& t, const Point2& x) {
  const double det = cross(t[1] - t[0], t[2] - t[0]);
  const double l1 = cross(x - t[0], t[2] - t[0]) / det;
  const double l2 = cross(t[1] - t[0], x - t[0]) / det;
  return {1.0 - l1 - l2, l1, l2};
}

void append_plain(const std::array<Point2, 3>& c, double area, const TriangleRule& ref, std::vector<QuadPoint>& out) {
  const Vec2 e1 = c[1] - c[0];
  const Vec2 e2 = c[2] - c[0];
  for (std::size_t i = 0; i < ref.points.size(); ++i) {
    const auto& p = ref.points[i];
    out.push_back({c[0] + p.x * e1 + p.y * e2, 2.0 * area * ref.weights[i]});
  }
}

void append_polar(const ElementRule& rule, const QuadratureOptions& opt, std::vector<QuadPoint>& out) {
  const LineRule& gt = gauss_legendre(opt.angular_order);
  const LineRule& gr = gauss_legendre(opt.radial_order);
  const double lambda = std::min(rule.exponent, 1.0);
  const double jacobi_b = 2.0 * lambda - 1.0;
  const LineRule gj = lambda == 1.0 ? LineRule{} : gauss_jacobi(opt.radial_order, jacobi_b);
  const Point2 c = rule.center;

  auto radial_segment = [&](double r0, double r1, double wtheta, const Vec2& dir) {
    const double len = r1 - r0;
    for (std::size_t j = 0; j < gr.nodes.size(); ++j) {
      const double r = r0 + len * gr.nodes[j];
      out.push_back({c + r * dir, wtheta * gr.weights[j] * len * r});
    }
  };

  for (const auto& sector : rule.sectors) {
    const Vec2 dp = sector[0] - c;
    const Vec2 edge = sector[1] - sector[0];
    const double theta0 = std::atan2(dp.y, dp.x);
    const Vec2 dq = sector[1] - c;
    const double span = std::atan2(cross(dp, dq), dot(dp, dq));
    const double cell = span / opt.angular_cells;
    const double numer = cross(dp, edge);
    for (int m = 0; m < opt.angular_cells; ++m) {
      for (std::size_t i = 0; i < gt.nodes.size(); ++i) {
        const double theta = theta0 + cell * (m + gt.nodes[i]);
        const double wtheta = gt.weights[i] * cell;
        const Vec2 dir{std::cos(theta), std::sin(theta)};
        const double rmax = numer / cross(dir, edge);

        double r_first = rmax;
        std::vector<double> cuts;
        for (double b : rule.radial_breaks) {
          if (b < rmax * (1.0 - 1e-14)) cuts.push_back(b);
        }
        if (!cuts.empty()) r_first = cuts.front();
        cuts.push_back(rmax);

        // Graded innermost segment [0, r_first].
        double hi = r_first;
        for (int k = 0; k < rule.levels; ++k) {
          const double lo = hi * opt.grading_ratio;
          radial_segment(lo, hi, wtheta, dir);
          hi = lo;
        }
        if (lambda == 1.0) {
          radial_segment(0.0, hi, wtheta, dir);
        } else {
          // Gauss-Jacobi with weight r^(2 lambda - 1): the leading energy
          // term divided by the weight is smooth.
          for (std::size_t j = 0; j < gj.nodes.size(); ++j) {
            const double s = gj.nodes[j];
            const double r = hi * s;
            out.push_back({c + r * dir, wtheta * hi * gj.weights[j] * std::pow(s, -jacobi_b) * r});
          }
        }
        // Outer segments are split geometrically as well, so that profiles
        // like 1/r between a small break and the element edge stay resolved.
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
          double lo = cuts[s];
          while (cuts[s + 1] * opt.grading_ratio > lo * (1.0 + 1e-12)) {
            const double next = lo / opt.grading_ratio;
            radial_segment(lo, next, wtheta, dir);
            lo = next;
          }
          radial_segment(lo, cuts[s + 1], wtheta, dir);
        }
      }
    }
  }
}

}  // namespace

const LineRule& gauss_legendre(int points) {
  QMLOC_THROW_IF(points < 1 || points > 200, ErrorCode::InvalidInput, "Gauss rule size out of range");
  static std::map<int, LineRule> cache;
  static std::mutex m;
  return cached(cache, m, points, compute_gauss_legendre);
}

LineRule gauss_jacobi(int points, double b) {
  QMLOC_THROW_IF(points < 1 || points > 200, ErrorCode::InvalidInput, "unsupported Gauss-Jacobi order");
  QMLOC_THROW_IF(!(b > -1.0), ErrorCode::InvalidInput, "Jacobi exponent must exceed -1");
  return compute_gauss_jacobi(points, b);
}

const TriangleRule& reference_triangle_rule(int exactness) {
  QMLOC_THROW_IF(exactness < 0 || exactness > 60, ErrorCode::InvalidInput, "triangle rule exactness out of range");
  static std::map<int, TriangleRule> cache;
  static std::mutex m;
  return cached(cache, m, exactness, compute_triangle_rule);
}

QuadraturePlan::QuadraturePlan(const Triangulation& mesh, std::vector<ElementRule> rules, QuadratureOptions options)
    : mesh_(&mesh), rules_(std::move(rules)), options_(options) {
  QMLOC_THROW_IF(rules_.size() != mesh.num_triangles(), ErrorCode::PlanMismatch, "one rule per element required");
}

const Triangulation& QuadraturePlan::mesh() const {
  QMLOC_THROW_IF(mesh_ == nullptr, ErrorCode::PlanMismatch, "empty quadrature plan");
  return *mesh_;
}

void QuadraturePlan::check_mesh(const Triangulation& mesh) const {
  QMLOC_THROW_IF(mesh_ != &mesh, ErrorCode::PlanMismatch, "quadrature plan was built for a different mesh");
}

void QuadraturePlan::append_points(Id k, std::vector<QuadPoint>& out) const {
  QMLOC_THROW_IF(k >= rules_.size(), ErrorCode::PlanMismatch, "element " + std::to_string(k) + " not in plan");
  const ElementRule& rule = rules_[k];
  if (rule.kind == ElementRule::Kind::Plain) {
    append_plain(mesh_->corners(k), mesh_->area(k), reference_triangle_rule(rule.exactness), out);
  } else {
    append_polar(rule, options_, out);
  }
}

std::vector<QuadPoint> QuadraturePlan::points(Id k) const {
  std::vector<QuadPoint> out;
  append_points(k, out);
  return out;
}

nlohmann::ordered_json QuadraturePlan::to_json(bool include_points) const {
  nlohmann::ordered_json doc;
  doc["grading_ratio"] = options_.grading_ratio;
  doc["rtol"] = options_.rtol;
  auto& elems = doc["elements"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < rules_.size(); ++k) {
    const auto& r = rules_[k];
    nlohmann::ordered_json e;
    e["element"] = k;
    e["rule"] = r.kind == ElementRule::Kind::Plain ? "plain" : "polar";
    e["exactness"] = r.exactness;
    if (r.kind == ElementRule::Kind::Polar) {
      e["center"] = {r.center.x, r.center.y};
      e["exponent"] = r.exponent;
      e["radial_breaks"] = r.radial_breaks;
      e["levels"] = r.levels;
      e["sectors"] = r.sectors.size();
    }
    if (include_points) {
      auto& pts = e["points"] = nlohmann::ordered_json::array();
      for (const auto& q : points(static_cast<Id>(k))) pts.push_back({q.x.x, q.x.y, q.weight});
    }
    elems.push_back(std::move(e));
  }
  return doc;
}

QuadraturePlan make_quadrature_plan(const Triangulation& mesh, int exactness) {
  std::vector<ElementRule> rules(mesh.num_triangles());
  for (auto& r : rules) r.exactness = exactness;
  return QuadraturePlan(mesh, std::move(rules), {});
}

QuadraturePlan make_quadrature_plan(const Triangulation& mesh, const Field& target, int exactness,
                                    const QuadratureOptions& options) {
  QMLOC_THROW_IF(!(options.grading_ratio > 0.0 && options.grading_ratio < 1.0), ErrorCode::InvalidInput,
                 "grading ratio must lie in (0, 1)");
  const auto singular = target.singular_points();
  std::vector<ElementRule> rules(mesh.num_triangles());
  std::vector<Id> polar_elements;

  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    auto& rule = rules[k];
    rule.exactness = exactness;
    const auto c = mesh.corners(static_cast<Id>(k));
    const double h = mesh.diameter(static_cast<Id>(k));
    const SingularPoint* hit = nullptr;
    for (const auto& s : singular) {
      const auto lam = barycentric(c, s.center);
      if (lam[0] >= -1e-12 && lam[1] >= -1e-12 && lam[2] >= -1e-12) {
        QMLOC_THROW_IF(hit != nullptr, ErrorCode::QuadratureFailure,
                       "element " + std::to_string(k) + " contains more than one singular point");
        hit = &s;
      }
    }
    if (hit == nullptr) continue;

    rule.kind = ElementRule::Kind::Polar;
    rule.center = hit->center;
    rule.exponent = hit->exponent;
    QMLOC_THROW_IF(!(hit->exponent > 0.0), ErrorCode::InvalidInput, "singular exponent must be positive");
    rule.radial_breaks = hit->radial_breaks;
    std::sort(rule.radial_breaks.begin(), rule.radial_breaks.end());
    for (int i = 0; i < 3; ++i) {
      const Point2& p = c[(i + 1) % 3];
      const Point2& q = c[(i + 2) % 3];
      const double dist = std::abs(cross(q - p, hit->center - p)) / distance(p, q);
      if (dist > 1e-12 * h) rule.sectors.push_back({p, q});
    }
    rule.levels = options.min_levels;
    polar_elements.push_back(static_cast<Id>(k));
  }

  QuadraturePlan plan(mesh, rules, options);
  if (polar_elements.empty()) return plan;

  auto probe = [&](const ElementRule& rule) {
    std::vector<QuadPoint> pts;
    append_polar(rule, options, pts);
    double s = 0.0;
    for (const auto& q : pts) {
      const double u = target.value(q.x);
      s += q.weight * (u * u + norm_sq(target.gradient(q.x)));
    }
    return s;
  };

  for (Id k : polar_elements) {
    ElementRule rule = rules[k];
    double prev = probe(rule);
    bool converged = false;
    while (rule.levels < options.max_levels) {
      ++rule.levels;
      const double cur = probe(rule);
      if (std::abs(cur - prev) <= options.rtol * std::abs(cur) + 1e-300) {
        converged = true;
        break;
      }
      prev = cur;
    }
    QMLOC_THROW_IF(!converged, ErrorCode::QuadratureFailure,
                   "graded rule on element " + std::to_string(k) + " did not converge within " +
                       std::to_string(options.max_levels) + " levels");
    rules[k] = rule;
  }

  // Singular points must never coincide with an evaluation node.
  QuadraturePlan out(mesh, std::move(rules), options);
  for (Id k : polar_elements) {
    for (const auto& q : out.points(k)) {
      QMLOC_THROW_IF(q.x == out.rule(k).center, ErrorCode::SingularPointOnQuadratureNode,
                     "element " + std::to_string(k));
    }
  }
  return out;
}

double integrate(const ScalarFn& f, std::span<const Id> region, const QuadraturePlan& plan) {
  std::vector<Id> ids(region.begin(), region.end());
  std::sort(ids.begin(), ids.end());
  double total = 0.0;
  std::vector<QuadPoint> pts;
  for (Id k : ids) {
    pts.clear();
    plan.append_points(k, pts);
    double s = 0.0;
    for (const auto& q : pts) s += q.weight * f(q.x);
    total += s;
  }
  return total;
}

double integrate(const ScalarFn& f, const QuadraturePlan& plan) {
  std::vector<Id> all(plan.num_elements());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<Id>(k);
  return integrate(f, all, plan);
}

}  // namespace qmloc
