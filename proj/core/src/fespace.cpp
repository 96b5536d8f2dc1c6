#include "qmloc/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "qmloc/error.hpp"
#include "qmloc/quadrature.hpp"

namespace qmloc {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// int over the reference triangle of x^a y^b.
double reference_monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

struct AffineMap {
  Point2 origin;
  // Columns of the Jacobian J = [v1 - v0, v2 - v0].
  Vec2 e1, e2;
  double det = 0.0;

  explicit AffineMap(const std::array<Point2, 3>& c)
      : origin(c[0]), e1(c[1] - c[0]), e2(c[2] - c[0]), det(cross(c[1] - c[0], c[2] - c[0])) {}

  [[nodiscard]] Point2 to_reference(const Point2& x) const {
    const Vec2 d = x - origin;
    return {cross(d, e2) / det, cross(e1, d) / det};
  }
  [[nodiscard]] Point2 to_physical(const Point2& r) const { return origin + r.x * e1 + r.y * e2; }
  // J^{-T} g
  [[nodiscard]] Vec2 pull_gradient(const Vec2& g) const {
    return {(e2.y * g.x - e1.y * g.y) / det, (-e2.x * g.x + e1.x * g.y) / det};
  }
};

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

ReferenceElement::ReferenceElement(int degree) : degree_(degree) {
  const int l = degree;
  lattice_.push_back({l, 0, 0});
  lattice_.push_back({0, l, 0});
  lattice_.push_back({0, 0, l});
  for (int k = 1; k < l; ++k) lattice_.push_back({l - k, k, 0});
  for (int k = 1; k < l; ++k) lattice_.push_back({0, l - k, k});
  for (int k = 1; k < l; ++k) lattice_.push_back({k, 0, l - k});
  for (int a1 = 1; a1 < l; ++a1) {
    for (int a2 = 1; a1 + a2 < l; ++a2) lattice_.push_back({l - a1 - a2, a1, a2});
  }
  for (int total = 0; total <= l; ++total) {
    for (int j = 0; j <= total; ++j) monomials_.push_back({total - j, j});
  }
  const auto n = static_cast<Eigen::Index>(lattice_.size());
  Eigen::MatrixXd vandermonde(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point2 p = node(static_cast<std::size_t>(i));
    for (Eigen::Index m = 0; m < n; ++m) vandermonde(i, m) = ipow(p.x, monomials_[m][0]) * ipow(p.y, monomials_[m][1]);
  }
  coeffs_ = vandermonde.fullPivLu().inverse();

  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      gram(a, b) = reference_monomial_integral(monomials_[a][0] + monomials_[b][0], monomials_[a][1] + monomials_[b][1]);
    }
  }
  mass_ = coeffs_.transpose() * gram * coeffs_;
}

const ReferenceElement& ReferenceElement::get(int degree) {
  QMLOC_THROW_IF(degree < 1 || degree > 4, ErrorCode::UnsupportedDegree,
                 "degree " + std::to_string(degree) + " (supported: 1..4)");
  static std::array<std::unique_ptr<ReferenceElement>, 5> cache;
  static std::mutex m;
  std::lock_guard lock(m);
  if (!cache[degree]) cache[degree].reset(new ReferenceElement(degree));
  return *cache[degree];
}

Point2 ReferenceElement::node(std::size_t i) const {
  const auto& a = lattice_.at(i);
  return {static_cast<double>(a[1]) / degree_, static_cast<double>(a[2]) / degree_};
}

namespace {

// P_m(t) = prod_{j < m} (l t - j) / (j + 1) and its derivative; the nodal
// basis function of multi-index (a0, a1, a2) is P_a0(l0) P_a1(l1) P_a2(l2).
void lattice_factor(int l, int m, double t, double& value, double& derivative) {
  value = 1.0;
  derivative = 0.0;
  for (int j = 0; j < m; ++j) {
    const double f = (l * t - j) / (j + 1);
    derivative = derivative * f + value * l / (j + 1);
    value *= f;
  }
}

}  // namespace

void ReferenceElement::eval(const Point2& ref, std::span<double> values) const {
  const std::array<double, 3> lam{1.0 - ref.x - ref.y, ref.x, ref.y};
  for (std::size_t i = 0; i < lattice_.size(); ++i) {
    double v = 1.0, d = 0.0;
    for (int c = 0; c < 3; ++c) {
      double f = 0.0;
      lattice_factor(degree_, lattice_[i][c], lam[c], f, d);
      v *= f;
    }
    values[i] = v;
  }
}

void ReferenceElement::eval_gradients(const Point2& ref, std::span<Vec2> gradients) const {
  const std::array<double, 3> lam{1.0 - ref.x - ref.y, ref.x, ref.y};
  static constexpr std::array<Vec2, 3> grad_lam{Vec2{-1.0, -1.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
  for (std::size_t i = 0; i < lattice_.size(); ++i) {
    std::array<double, 3> f{}, df{};
    for (int c = 0; c < 3; ++c) lattice_factor(degree_, lattice_[i][c], lam[c], f[c], df[c]);
    gradients[i] = (df[0] * f[1] * f[2]) * grad_lam[0] + (f[0] * df[1] * f[2]) * grad_lam[1] +
                   (f[0] * f[1] * df[2]) * grad_lam[2];
  }
}

LagrangeSpace LagrangeSpace::build(const Triangulation& mesh, int degree, bool dirichlet_on_boundary) {
  const ReferenceElement& ref = ReferenceElement::get(degree);
  LagrangeSpace s;
  s.mesh_ = &mesh;
  s.degree_ = degree;
  s.dirichlet_ = dirichlet_on_boundary;

  const auto nv = mesh.num_vertices();
  const auto ne = mesh.num_edges();
  const auto nt = mesh.num_triangles();
  const int per_edge = degree - 1;
  const int per_cell = (degree - 1) * (degree - 2) / 2;

  s.nodes_.reserve(nv + ne * per_edge + nt * per_cell);
  for (std::size_t v = 0; v < nv; ++v) {
    s.nodes_.push_back({mesh.vertex(static_cast<Id>(v)), NodeKind::Vertex, static_cast<Id>(v),
                        mesh.is_boundary_vertex(static_cast<Id>(v))});
  }
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& edge = mesh.edge(static_cast<Id>(e));
    const Point2& p = mesh.vertex(edge.vertices[0]);
    const Point2& q = mesh.vertex(edge.vertices[1]);
    for (int k = 1; k < degree; ++k) {
      const double t = static_cast<double>(k) / degree;
      s.nodes_.push_back({(1.0 - t) * p + t * q, NodeKind::Edge, static_cast<Id>(e), edge.is_boundary()});
    }
  }
  const std::size_t interior_base = s.nodes_.size();

  const std::size_t nloc = ref.size();
  s.element_nodes_.assign(nt * nloc, kNoId);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& tri = mesh.triangle(static_cast<Id>(k));
    const AffineMap map(mesh.corners(static_cast<Id>(k)));
    int interior_count = 0;
    for (std::size_t i = 0; i < nloc; ++i) {
      const auto& a = ref.multi_index(i);
      std::array<int, 3> nonzero{};
      int count = 0;
      for (int j = 0; j < 3; ++j) {
        if (a[j] != 0) nonzero[count++] = j;
      }
      Id global = kNoId;
      if (count == 1) {
        global = tri[nonzero[0]];
      } else if (count == 2) {
        // Walk the edge from local vertex va to vb; position k = a[vb].
        int va = nonzero[0], vb = nonzero[1];
        if (!(vb == (va + 1) % 3)) std::swap(va, vb);
        const int pos = a[vb];
        const Id ga = tri[va], gb = tri[vb];
        const Id e = *mesh.find_edge(ga, gb);
        const int idx = ga < gb ? pos - 1 : degree - pos - 1;
        global = static_cast<Id>(nv + e * per_edge + idx);
      } else {
        global = static_cast<Id>(interior_base + k * per_cell + interior_count++);
        if (s.nodes_.size() <= global) {
          s.nodes_.push_back({map.to_physical(ref.node(i)), NodeKind::Interior, static_cast<Id>(k), false});
        }
      }
      s.element_nodes_[k * nloc + i] = global;
    }
  }
  return s;
}

std::span<const Id> LagrangeSpace::element_nodes(Id k) const {
  QMLOC_THROW_IF(k >= mesh_->num_triangles(), ErrorCode::UnknownLocus, "element " + std::to_string(k));
  const auto n = local_size();
  return std::span<const Id>(element_nodes_).subspan(k * n, n);
}

std::vector<Id> LagrangeSpace::edge_nodes(Id edge) const {
  QMLOC_THROW_IF(edge >= mesh_->num_edges(), ErrorCode::UnknownLocus, "edge " + std::to_string(edge));
  const auto& e = mesh_->edge(edge);
  std::vector<Id> out{e.vertices[0]};
  const auto base = mesh_->num_vertices() + static_cast<std::size_t>(edge) * (degree_ - 1);
  for (int k = 0; k < degree_ - 1; ++k) out.push_back(static_cast<Id>(base + k));
  out.push_back(e.vertices[1]);
  return out;
}

std::vector<Id> LagrangeSpace::node_star(Id z) const {
  const Node& n = node(z);
  switch (n.kind) {
    case NodeKind::Vertex: return patch_of(*mesh_, VertexLocus{n.entity});
    case NodeKind::Edge: return patch_of(*mesh_, EdgeLocus{n.entity});
    case NodeKind::Interior: return {n.entity};
  }
  return {};
}

Point2 LagrangeSpace::to_reference(Id k, const Point2& x) const {
  return AffineMap(mesh_->corners(k)).to_reference(x);
}

void eval_basis_unchecked(const LagrangeSpace& space, Id k, const Point2& x, std::span<double> values,
                          std::span<Vec2> gradients) {
  const AffineMap map(space.mesh().corners(k));
  const Point2 ref = map.to_reference(x);
  const auto& re = space.reference();
  if (!values.empty()) re.eval(ref, values);
  if (!gradients.empty()) {
    re.eval_gradients(ref, gradients);
    for (auto& g : gradients) g = map.pull_gradient(g);
  }
}

BasisValues eval_basis(const LagrangeSpace& space, Id k, const Point2& x, double tol) {
  const Point2 ref = space.to_reference(k, x);
  const double l0 = 1.0 - ref.x - ref.y;
  QMLOC_THROW_IF(ref.x < -tol || ref.y < -tol || l0 < -tol, ErrorCode::PointOutsideElement,
                 "point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") outside element " +
                     std::to_string(k));
  BasisValues out;
  out.values.resize(space.local_size());
  out.gradients.resize(space.local_size());
  eval_basis_unchecked(space, k, x, out.values, out.gradients);
  return out;
}

Eigen::MatrixXd element_mass(const LagrangeSpace& space, Id k) {
  return 2.0 * space.mesh().area(k) * space.reference().mass();
}

Eigen::MatrixXd element_stiffness(const LagrangeSpace& space, Id k) {
  const auto n = space.local_size();
  const auto& rule = reference_triangle_rule(2 * space.degree());
  const AffineMap map(space.mesh().corners(k));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Vec2> g(n);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    space.reference().eval_gradients(rule.points[q], g);
    for (auto& v : g) v = map.pull_gradient(v);
    const double w = rule.weights[q] * std::abs(map.det);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += w * dot(g[i], g[j]);
    }
  }
  return a;
}

Eigen::VectorXd element_basis_integrals(const LagrangeSpace& space, Id k) {
  return element_mass(space, k).rowwise().sum();
}

Eigen::MatrixXd element_dual_basis(const LagrangeSpace& space, Id k) {
  const Eigen::MatrixXd m = element_mass(space, k);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  QMLOC_THROW_IF(llt.info() != Eigen::Success, ErrorCode::SingularMassMatrix, "element " + std::to_string(k));
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

double eval_edge_basis(int degree, int i, double t) {
  double v = 1.0;
  const double ti = static_cast<double>(i) / degree;
  for (int j = 0; j <= degree; ++j) {
    if (j == i) continue;
    const double tj = static_cast<double>(j) / degree;
    v *= (t - tj) / (ti - tj);
  }
  return v;
}

Eigen::MatrixXd reference_edge_mass(int degree) {
  const auto n = static_cast<Eigen::Index>(degree + 1);
  const LineRule& g = gauss_legendre(degree + 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t q = 0; q < g.nodes.size(); ++q) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double bi = eval_edge_basis(degree, static_cast<int>(i), g.nodes[q]);
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) += g.weights[q] * bi * eval_edge_basis(degree, static_cast<int>(j), g.nodes[q]);
    }
  }
  return m;
}

Eigen::MatrixXd face_dual_basis(const LagrangeSpace& space, Id edge) {
  QMLOC_THROW_IF(edge >= space.mesh().num_edges(), ErrorCode::UnknownLocus, "edge " + std::to_string(edge));
  const auto& e = space.mesh().edge(edge);
  const double len = distance(space.mesh().vertex(e.vertices[0]), space.mesh().vertex(e.vertices[1]));
  const Eigen::MatrixXd m = len * reference_edge_mass(space.degree());
  return m.llt().solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace qmloc
