#pragma once

#include <array>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "qmloc/geometry.hpp"

namespace qmloc {

/// Undirected mesh edge. Vertex ids are stored ascending; `triangles[1]` is
/// kNoId on the domain boundary.
struct Edge {
  std::array<Id, 2> vertices{kNoId, kNoId};
  std::array<Id, 2> triangles{kNoId, kNoId};

  [[nodiscard]] bool is_boundary() const noexcept { return triangles[1] == kNoId; }
};

/// Conforming 2D simplicial mesh. Immutable after `build`; all queries are
/// const and thread-safe.
///
/// Ids are dense and 0-based. Triangles are stored counter-clockwise, and
/// local edge i of a triangle is the edge opposite its local vertex i.
/// Edge ids follow the lexicographic order of (min vertex, max vertex).
class Triangulation {
 public:
  /// Validates and completes the topology. Clockwise input triangles are
  /// reoriented. Throws NonConforming or DegenerateElement.
  static Triangulation build(std::vector<Point2> vertices, std::vector<std::array<Id, 3>> triangles);

  [[nodiscard]] std::size_t num_vertices() const noexcept { return vertices_.size(); }
  [[nodiscard]] std::size_t num_triangles() const noexcept { return triangles_.size(); }
  [[nodiscard]] std::size_t num_edges() const noexcept { return edges_.size(); }

  [[nodiscard]] const Point2& vertex(Id v) const { return vertices_.at(v); }
  [[nodiscard]] std::span<const Point2> vertices() const noexcept { return vertices_; }
  [[nodiscard]] const std::array<Id, 3>& triangle(Id k) const { return triangles_.at(k); }
  [[nodiscard]] std::span<const std::array<Id, 3>> triangles() const noexcept { return triangles_; }
  [[nodiscard]] const Edge& edge(Id e) const { return edges_.at(e); }
  [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }
  [[nodiscard]] const std::array<Id, 3>& triangle_edges(Id k) const { return triangle_edges_.at(k); }

  [[nodiscard]] std::array<Point2, 3> corners(Id k) const;
  [[nodiscard]] Point2 barycenter(Id k) const;

  [[nodiscard]] bool is_boundary_vertex(Id v) const { return boundary_vertex_.at(v) != 0; }
  [[nodiscard]] std::optional<Id> find_edge(Id a, Id b) const;

  /// Elements containing vertex v, ascending.
  [[nodiscard]] std::span<const Id> vertex_star(Id v) const;

  [[nodiscard]] double area(Id k) const { return area_.at(k); }
  /// Element diameter h_K (longest edge).
  [[nodiscard]] double diameter(Id k) const { return diameter_.at(k); }
  /// Diameter of the inscribed circle, i.e. twice the inradius.
  [[nodiscard]] double inscribed_diameter(Id k) const { return inscribed_.at(k); }
  /// max_K h_K / rho_K.
  [[nodiscard]] double shape_parameter() const noexcept { return sigma_; }
  [[nodiscard]] double total_area() const noexcept;

  /// For meshes produced by uniform_refine: parent element of each element
  /// in the coarser mesh. Empty otherwise.
  [[nodiscard]] std::span<const Id> parents() const noexcept { return parents_; }

 private:
  friend Triangulation uniform_refine(const Triangulation& coarse);

  std::vector<Point2> vertices_;
  std::vector<std::array<Id, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<Id, 3>> triangle_edges_;
  std::vector<char> boundary_vertex_;
  std::vector<Id> star_offsets_;
  std::vector<Id> star_elements_;
  std::vector<double> area_;
  std::vector<double> diameter_;
  std::vector<double> inscribed_;
  std::vector<Id> parents_;
  double sigma_ = 0.0;
};

struct VertexLocus { Id vertex; };
struct ElementLocus { Id element; };
struct EdgeLocus { Id edge; };
using Locus = std::variant<VertexLocus, ElementLocus, EdgeLocus>;

/// Element patch of a locus, ascending:
///  - vertex z: all elements containing z;
///  - element K: all elements sharing at least one vertex with K;
///  - edge F: the one or two elements containing F.
std::vector<Id> patch_of(const Triangulation& mesh, const Locus& locus);

double shape_parameter(const Triangulation& mesh);

/// Red refinement: every triangle is split into four similar children via
/// its edge midpoints. Child 4K+c descends from K.
Triangulation uniform_refine(const Triangulation& coarse);

}  // namespace qmloc
