#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmloc/geometry.hpp"
#include "qmloc/mesh.hpp"

namespace qmloc {

enum class NodeKind { Vertex, Edge, Interior };

struct Node {
  Point2 x;
  NodeKind kind = NodeKind::Vertex;
  /// Owning entity: vertex id, edge id or element id depending on `kind`.
  Id entity = kNoId;
  bool on_boundary = false;
};

/// Lagrange element of degree l on the reference triangle. Local nodes are
/// ordered: 3 vertices, then l-1 nodes per edge (edges v0v1, v1v2, v2v0,
/// walked in that direction), then interior nodes.
class ReferenceElement {
 public:
  static const ReferenceElement& get(int degree);

  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] std::size_t size() const noexcept { return lattice_.size(); }
  /// Barycentric multi-index (a0, a1, a2), a0 + a1 + a2 = degree.
  [[nodiscard]] const std::array<int, 3>& multi_index(std::size_t i) const { return lattice_.at(i); }
  [[nodiscard]] Point2 node(std::size_t i) const;

  void eval(const Point2& ref, std::span<double> values) const;
  void eval_gradients(const Point2& ref, std::span<Vec2> gradients) const;

  /// Exact reference mass and stiffness-type integrals.
  [[nodiscard]] const Eigen::MatrixXd& mass() const noexcept { return mass_; }

 private:
  explicit ReferenceElement(int degree);

  int degree_;
  std::vector<std::array<int, 3>> lattice_;
  std::vector<std::array<int, 2>> monomials_;
  Eigen::MatrixXd coeffs_;  // column i: monomial coefficients of basis function i
  Eigen::MatrixXd mass_;
};

/// Continuous piecewise-polynomial space S^{l,0} on a triangulation. Keeps a
/// reference to the mesh, which must outlive the space.
class LagrangeSpace {
 public:
  /// 1 <= degree <= 4, otherwise UnsupportedDegree.
  static LagrangeSpace build(const Triangulation& mesh, int degree, bool dirichlet_on_boundary);

  [[nodiscard]] const Triangulation& mesh() const noexcept { return *mesh_; }
  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] const ReferenceElement& reference() const { return ReferenceElement::get(degree_); }
  [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t local_size() const noexcept { return static_cast<std::size_t>((degree_ + 1) * (degree_ + 2) / 2); }

  [[nodiscard]] const Node& node(Id z) const { return nodes_.at(z); }
  [[nodiscard]] std::span<const Node> nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::span<const Id> element_nodes(Id k) const;

  /// Nodes on edge F ordered from its smaller to its larger vertex id.
  [[nodiscard]] std::vector<Id> edge_nodes(Id edge) const;

  [[nodiscard]] bool has_dirichlet() const noexcept { return dirichlet_; }
  /// True for boundary nodes when the space carries a Dirichlet mask.
  [[nodiscard]] bool is_constrained(Id z) const { return dirichlet_ && nodes_.at(z).on_boundary; }

  /// Elements whose closure contains node z (the support of phi_z), ascending.
  [[nodiscard]] std::vector<Id> node_star(Id z) const;

  /// Maps physical x in element k to reference coordinates.
  [[nodiscard]] Point2 to_reference(Id k, const Point2& x) const;

 private:
  const Triangulation* mesh_ = nullptr;
  int degree_ = 1;
  bool dirichlet_ = false;
  std::vector<Node> nodes_;
  std::vector<Id> element_nodes_;  // num_triangles * local_size
};

struct BasisValues {
  std::vector<double> values;
  std::vector<Vec2> gradients;
};

/// Local nodal basis on element k at physical point x; throws
/// PointOutsideElement if x is not in the (slightly enlarged) element.
BasisValues eval_basis(const LagrangeSpace& space, Id k, const Point2& x, double tol = 1e-10);

/// Same as eval_basis but without the containment check (for quadrature loops).
void eval_basis_unchecked(const LagrangeSpace& space, Id k, const Point2& x, std::span<double> values,
                          std::span<Vec2> gradients);

Eigen::MatrixXd element_mass(const LagrangeSpace& space, Id k);
Eigen::MatrixXd element_stiffness(const LagrangeSpace& space, Id k);
/// Integrals of the local basis functions over element k.
Eigen::VectorXd element_basis_integrals(const LagrangeSpace& space, Id k);

/// Row z holds the coefficients of psi_z^K in the local nodal basis, so that
/// int_K psi_z phi_y = delta_zy. Throws SingularMassMatrix.
Eigen::MatrixXd element_dual_basis(const LagrangeSpace& space, Id k);

/// 1D Lagrange element of degree l on [0, 1] with equispaced nodes.
Eigen::MatrixXd reference_edge_mass(int degree);
double eval_edge_basis(int degree, int i, double t);

/// Dual basis on edge F with respect to the nodal basis restricted to F,
/// in the node order of edge_nodes(F).
Eigen::MatrixXd face_dual_basis(const LagrangeSpace& space, Id edge);

}  // namespace qmloc
