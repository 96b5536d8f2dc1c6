#pragma once

// Independent reference computations for the tests. Nothing here goes through
// the library's assembly, quadrature or search code; only mesh geometry
// (vertex coordinates and triangle lists) is taken from a Triangulation.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qmloc/coefficient.hpp"
#include "qmloc/field.hpp"
#include "qmloc/geometry.hpp"
#include "qmloc/mesh.hpp"

namespace qmloc::testing {

inline Triangulation unit_square() {
  return Triangulation::build({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, {{0, 1, 2}, {1, 3, 2}});
}

inline Triangulation reference_triangle() { return Triangulation::build({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}); }

/// 2x2 grid of squares with a displaced middle vertex: 8 triangles of mixed shape.
inline Triangulation jittered_grid(double dx = 0.13, double dy = -0.08) {
  std::vector<Point2> v;
  for (int j = 0; j <= 2; ++j) {
    for (int i = 0; i <= 2; ++i) v.push_back({0.5 * i, 0.5 * j});
  }
  v[4] += Point2{dx, dy};
  std::vector<std::array<Id, 3>> t;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const Id bl = static_cast<Id>(3 * j + i), br = bl + 1, tl = bl + 3, tr = bl + 4;
      if ((i + j) % 2 == 0) {
        t.push_back({bl, br, tr});
        t.push_back({bl, tr, tl});
      } else {
        t.push_back({bl, br, tl});
        t.push_back({br, tr, tl});
      }
    }
  }
  return Triangulation::build(std::move(v), std::move(t));
}

/// Seven-point rule exact for total degree 5 on any triangle (weights relative
/// to the area). Barycentric points.
struct SevenPoint {
  std::vector<std::array<double, 3>> lambda;
  std::vector<double> weight;

  SevenPoint() {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
    const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
    lambda.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
    weight.push_back(9.0 / 40.0);
    for (const auto& [a, b, w] : {std::tuple{a1, b1, w1}, std::tuple{a2, b2, w2}}) {
      lambda.push_back({a, a, b});
      lambda.push_back({a, b, a});
      lambda.push_back({b, a, a});
      weight.insert(weight.end(), 3, w);
    }
  }
};

/// Collapsed 5x5 Gauss-Legendre rule, exact for total degree 8 on any
/// triangle (weights relative to the area). Closed-form nodes.
struct CollapsedGauss {
  std::vector<std::array<double, 3>> lambda;
  std::vector<double> weight;

  CollapsedGauss() {
    const double r = 2.0 * std::sqrt(10.0 / 7.0);
    const double x1 = std::sqrt(5.0 - r) / 3.0, x2 = std::sqrt(5.0 + r) / 3.0;
    const double w1 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0, w2 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    const std::array<double, 5> node{-x2, -x1, 0.0, x1, x2};
    const std::array<double, 5> w{w2, w1, 128.0 / 225.0, w1, w2};
    for (int i = 0; i < 5; ++i) {
      const double s = 0.5 * (1.0 + node[i]);
      for (int j = 0; j < 5; ++j) {
        const double t = 0.5 * (1.0 + node[j]);
        const double x = s, y = (1.0 - s) * t;
        lambda.push_back({1.0 - x - y, x, y});
        weight.push_back(2.0 * 0.25 * w[i] * w[j] * (1.0 - s));
      }
    }
  }
};

/// Degree-1 or degree-2 Lagrange basis written in barycentric coordinates.
struct BaryElement {
  std::array<Point2, 3> p;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;

  explicit BaryElement(const std::array<Point2, 3>& corners) : p(corners) {
    const double twice = cross(p[1] - p[0], p[2] - p[0]);
    area = 0.5 * std::abs(twice);
    for (int i = 0; i < 3; ++i) {
      const Point2& q1 = p[(i + 1) % 3];
      const Point2& q2 = p[(i + 2) % 3];
      grad_lambda[i] = {(q1.y - q2.y) / twice, (q2.x - q1.x) / twice};
    }
  }

  Point2 point(const std::array<double, 3>& l) const { return l[0] * p[0] + l[1] * p[1] + l[2] * p[2]; }

  // Local order: vertices 0,1,2 then (degree 2) edges (0,1), (1,2), (2,0).
  void eval(int degree, const std::array<double, 3>& l, std::vector<double>& v, std::vector<Vec2>& g) const {
    v.clear();
    g.clear();
    if (degree == 1) {
      for (int i = 0; i < 3; ++i) {
        v.push_back(l[i]);
        g.push_back(grad_lambda[i]);
      }
      return;
    }
    for (int i = 0; i < 3; ++i) {
      v.push_back(l[i] * (2.0 * l[i] - 1.0));
      g.push_back((4.0 * l[i] - 1.0) * grad_lambda[i]);
    }
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3;
      v.push_back(4.0 * l[i] * l[j]);
      g.push_back(4.0 * (l[j] * grad_lambda[i] + l[i] * grad_lambda[j]));
    }
  }
};

/// Dense Ritz oracle for degree 1 or 2 on an element subset of `mesh`:
/// minimizes sum_K a_K |grad(u - V)|^2_K + beta |u - V|^2 over V in the
/// Lagrange space on the region. With `dirichlet`, nodes on the boundary of
/// the whole mesh are zero; with no such node and beta = 0 the first node is
/// pinned.
/// Exact while the integrands have degree <= 8.
struct DenseOracle {
  int degree = 1;
  bool dirichlet = false;
  double beta = 0.0;

  double solve(const Triangulation& mesh, const std::vector<double>& a, const std::vector<Id>& region,
               const std::function<double(const Point2&)>& u, const std::function<Vec2(const Point2&)>& grad_u) const {
    // Boundary of the whole mesh from the raw triangle list.
    std::map<std::pair<Id, Id>, int> edge_count;
    auto key = [](Id x, Id y) { return std::pair{std::min(x, y), std::max(x, y)}; };
    for (const auto& t : mesh.triangles()) {
      for (int i = 0; i < 3; ++i) ++edge_count[key(t[i], t[(i + 1) % 3])];
    }
    std::set<Id> boundary_vertices;
    for (const auto& [e, c] : edge_count) {
      if (c == 1) {
        boundary_vertices.insert(e.first);
        boundary_vertices.insert(e.second);
      }
    }

    // Degrees of freedom: ('v', vertex) and ('e', edge key).
    std::map<std::pair<Id, Id>, int> vertex_dof, edge_dof;
    std::vector<char> fixed;
    auto dof_of_vertex = [&](Id v) {
      auto [it, fresh] = vertex_dof.try_emplace({v, v}, static_cast<int>(fixed.size()));
      if (fresh) fixed.push_back(dirichlet && boundary_vertices.count(v) ? 1 : 0);
      return it->second;
    };
    auto dof_of_edge = [&](Id x, Id y) {
      const auto k = key(x, y);
      auto [it, fresh] = edge_dof.try_emplace(k, static_cast<int>(fixed.size()));
      if (fresh) fixed.push_back(dirichlet && edge_count.at(k) == 1 ? 1 : 0);
      return it->second;
    };

    struct Local {
      std::vector<int> dofs;
      Eigen::MatrixXd matrix;
      Eigen::VectorXd load;
      double energy = 0.0;
    };
    std::vector<Local> locals;
    const CollapsedGauss rule;
    for (Id k : region) {
      const auto& t = mesh.triangle(k);
      const BaryElement el({mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2])});
      Local loc;
      for (int i = 0; i < 3; ++i) loc.dofs.push_back(dof_of_vertex(t[i]));
      if (degree == 2) {
        for (int i = 0; i < 3; ++i) loc.dofs.push_back(dof_of_edge(t[i], t[(i + 1) % 3]));
      }
      const int n = static_cast<int>(loc.dofs.size());
      loc.matrix = Eigen::MatrixXd::Zero(n, n);
      loc.load = Eigen::VectorXd::Zero(n);
      std::vector<double> v;
      std::vector<Vec2> g;
      for (std::size_t q = 0; q < rule.weight.size(); ++q) {
        el.eval(degree, rule.lambda[q], v, g);
        const Point2 x = el.point(rule.lambda[q]);
        const double w = rule.weight[q] * el.area;
        const double uv = u(x);
        const Vec2 ug = grad_u(x);
        loc.energy += w * (a[k] * norm_sq(ug) + beta * uv * uv);
        for (int i = 0; i < n; ++i) {
          loc.load(i) += w * (a[k] * dot(ug, g[i]) + beta * uv * v[i]);
          for (int j = 0; j < n; ++j) loc.matrix(i, j) += w * (a[k] * dot(g[i], g[j]) + beta * v[i] * v[j]);
        }
      }
      locals.push_back(std::move(loc));
    }

    const int total = static_cast<int>(fixed.size());
    const bool any_fixed = std::find(fixed.begin(), fixed.end(), 1) != fixed.end();
    if (!any_fixed && beta == 0.0 && total > 0) fixed[0] = 1;
    std::vector<int> free_index(total, -1);
    int nfree = 0;
    for (int i = 0; i < total; ++i) {
      if (!fixed[i]) free_index[i] = nfree++;
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nfree, nfree);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nfree);
    double energy = 0.0;
    for (const auto& loc : locals) {
      energy += loc.energy;
      for (std::size_t i = 0; i < loc.dofs.size(); ++i) {
        const int fi = free_index[loc.dofs[i]];
        if (fi < 0) continue;
        b(fi) += loc.load(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < loc.dofs.size(); ++j) {
          const int fj = free_index[loc.dofs[j]];
          if (fj >= 0) A(fi, fj) += loc.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
    if (nfree == 0) return energy;
    const Eigen::VectorXd x = A.ldlt().solve(b);
    return std::max(0.0, energy - b.dot(x));
  }
};

/// Every (from, to) pair of a vertex star with a_from <= a_to that no chain of
/// edge-adjacent star elements with non-decreasing a joins, found by
/// enumerating all simple paths.
inline std::set<std::pair<Id, Id>> brute_force_unreachable(const Triangulation& mesh, const std::vector<double>& a,
                                                           Id vertex) {
  std::vector<Id> star;
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangle(static_cast<Id>(k));
    if (t[0] == vertex || t[1] == vertex || t[2] == vertex) star.push_back(static_cast<Id>(k));
  }
  auto adjacent = [&](Id p, Id q) {
    int shared = 0;
    for (Id x : mesh.triangle(p)) {
      for (Id y : mesh.triangle(q)) shared += x == y ? 1 : 0;
    }
    return shared == 2;
  };
  std::set<std::pair<Id, Id>> out;
  for (Id from : star) {
    for (Id to : star) {
      if (from == to || a[from] > a[to]) continue;
      bool found = false;
      std::vector<Id> path{from};
      std::function<void()> dfs = [&] {
        if (found) return;
        const Id last = path.back();
        if (last == to) {
          found = true;
          return;
        }
        for (Id next : star) {
          if (std::find(path.begin(), path.end(), next) != path.end()) continue;
          if (!adjacent(last, next) || a[last] > a[next]) continue;
          path.push_back(next);
          dfs();
          path.pop_back();
        }
      };
      dfs();
      if (!found) out.insert({from, to});
    }
  }
  return out;
}

inline std::vector<Id> all_elements(const Triangulation& mesh) {
  std::vector<Id> v(mesh.num_triangles());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<Id>(k);
  return v;
}

inline std::vector<double> values_of(const Coefficient& a) { return {a.values().begin(), a.values().end()}; }

/// Random polynomial of total degree <= `degree` with value and gradient.
struct RandomPolynomial {
  int degree = 1;
  std::vector<std::array<int, 2>> powers;
  std::vector<double> coeffs;

  RandomPolynomial(int deg, std::mt19937_64& rng) : degree(deg) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int total = 0; total <= deg; ++total) {
      for (int i = 0; i <= total; ++i) {
        powers.push_back({total - i, i});
        coeffs.push_back(d(rng));
      }
    }
  }

  double value(const Point2& x) const {
    double s = 0.0;
    for (std::size_t m = 0; m < powers.size(); ++m) {
      s += coeffs[m] * std::pow(x.x, powers[m][0]) * std::pow(x.y, powers[m][1]);
    }
    return s;
  }

  Vec2 gradient(const Point2& x) const {
    Vec2 g;
    for (std::size_t m = 0; m < powers.size(); ++m) {
      const auto [i, j] = powers[m];
      if (i > 0) g.x += coeffs[m] * i * std::pow(x.x, i - 1) * std::pow(x.y, j);
      if (j > 0) g.y += coeffs[m] * j * std::pow(x.x, i) * std::pow(x.y, j - 1);
    }
    return g;
  }

  FunctionField field() const {
    return FunctionField([*this](const Point2& x) { return value(x); },
                         [*this](const Point2& x) { return gradient(x); });
  }
};

}  // namespace qmloc::testing
