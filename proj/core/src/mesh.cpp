#include "qmloc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qmloc/error.hpp"

namespace qmloc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonConforming: return "NonConforming";
    case ErrorCode::DegenerateElement: return "DegenerateElement";
    case ErrorCode::UnknownLocus: return "UnknownLocus";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::PointOutsideElement: return "PointOutsideElement";
    case ErrorCode::SingularMassMatrix: return "SingularMassMatrix";
    case ErrorCode::SingularPointOnQuadratureNode: return "SingularPointOnQuadratureNode";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::LocusMismatch: return "LocusMismatch";
    case ErrorCode::NoMonotonePath: return "NoMonotonePath";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::RefusesNonQM: return "RefusesNonQM";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * cross(b - a, c - a);
}

std::pair<Id, Id> edge_key(Id a, Id b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

Triangulation Triangulation::build(std::vector<Point2> vertices, std::vector<std::array<Id, 3>> triangles) {
  QMLOC_THROW_IF(triangles.empty(), ErrorCode::InvalidInput, "mesh needs at least one triangle");
  for (const auto& p : vertices) {
    QMLOC_THROW_IF(!std::isfinite(p.x) || !std::isfinite(p.y), ErrorCode::InvalidInput,
                   "non-finite vertex coordinate");
  }

  Triangulation t;
  t.vertices_ = std::move(vertices);
  t.triangles_ = std::move(triangles);
  const auto nv = t.vertices_.size();
  const auto nt = t.triangles_.size();

  t.area_.resize(nt);
  t.diameter_.resize(nt);
  t.inscribed_.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    auto& tri = t.triangles_[k];
    for (Id v : tri) {
      QMLOC_THROW_IF(v >= nv, ErrorCode::InvalidInput,
                     "triangle " + std::to_string(k) + " references vertex out of range");
    }
    QMLOC_THROW_IF(tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2], ErrorCode::DegenerateElement,
                   "triangle " + std::to_string(k) + " repeats a vertex");
    const auto& a = t.vertices_[tri[0]];
    const auto& b = t.vertices_[tri[1]];
    const auto& c = t.vertices_[tri[2]];
    double area = signed_area(a, b, c);
    if (area < 0.0) {
      std::swap(tri[1], tri[2]);
      area = -area;
    }
    const double lab = distance(a, b), lbc = distance(b, c), lca = distance(c, a);
    const double h = std::max({lab, lbc, lca});
    QMLOC_THROW_IF(!(area > 1e-14 * h * h), ErrorCode::DegenerateElement,
                   "triangle " + std::to_string(k) + " has zero area");
    t.area_[k] = area;
    t.diameter_[k] = h;
    t.inscribed_[k] = 2.0 * area / (0.5 * (lab + lbc + lca));
    t.sigma_ = std::max(t.sigma_, h / t.inscribed_[k]);
  }

  // Edges, lexicographically ordered by their sorted vertex pair.
  std::map<std::pair<Id, Id>, std::vector<Id>> incidence;
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& tri = t.triangles_[k];
    for (int i = 0; i < 3; ++i) {
      incidence[edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3])].push_back(static_cast<Id>(k));
    }
  }
  t.edges_.reserve(incidence.size());
  std::map<std::pair<Id, Id>, Id> edge_ids;
  for (const auto& [key, tris] : incidence) {
    QMLOC_THROW_IF(tris.size() > 2, ErrorCode::NonConforming,
                   "edge (" + std::to_string(key.first) + "," + std::to_string(key.second) + ") has " +
                       std::to_string(tris.size()) + " incident triangles");
    Edge e;
    e.vertices = {key.first, key.second};
    e.triangles[0] = tris[0];
    if (tris.size() == 2) e.triangles[1] = tris[1];
    edge_ids.emplace(key, static_cast<Id>(t.edges_.size()));
    t.edges_.push_back(e);
  }
  t.triangle_edges_.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& tri = t.triangles_[k];
    for (int i = 0; i < 3; ++i) {
      t.triangle_edges_[k][i] = edge_ids.at(edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3]));
    }
  }
  // An interior edge must be traversed in opposite directions by its two triangles.
  for (const auto& e : t.edges_) {
    if (e.is_boundary()) continue;
    auto direction = [&](Id k) {
      const auto& tri = t.triangles_[k];
      for (int i = 0; i < 3; ++i) {
        if (tri[i] == e.vertices[0] && tri[(i + 1) % 3] == e.vertices[1]) return 1;
      }
      return -1;
    };
    QMLOC_THROW_IF(direction(e.triangles[0]) == direction(e.triangles[1]), ErrorCode::NonConforming,
                   "overlapping triangles across edge (" + std::to_string(e.vertices[0]) + "," +
                       std::to_string(e.vertices[1]) + ")");
  }

  t.boundary_vertex_.assign(nv, 0);
  for (const auto& e : t.edges_) {
    if (e.is_boundary()) {
      t.boundary_vertex_[e.vertices[0]] = 1;
      t.boundary_vertex_[e.vertices[1]] = 1;
    }
  }

  // Hanging vertices sit strictly inside an edge that only one triangle sees.
  for (const auto& e : t.edges_) {
    if (!e.is_boundary()) continue;
    const Point2& p = t.vertices_[e.vertices[0]];
    const Point2& q = t.vertices_[e.vertices[1]];
    const Vec2 d = q - p;
    const double len2 = norm_sq(d);
    for (std::size_t v = 0; v < nv; ++v) {
      if (v == e.vertices[0] || v == e.vertices[1]) continue;
      const Vec2 r = t.vertices_[v] - p;
      const double s = dot(r, d) / len2;
      if (s <= 1e-12 || s >= 1.0 - 1e-12) continue;
      if (std::abs(cross(d, r)) <= 1e-12 * len2) {
        throw Error(ErrorCode::NonConforming,
                    "vertex " + std::to_string(v) + " lies inside edge (" + std::to_string(e.vertices[0]) + "," +
                        std::to_string(e.vertices[1]) + ")");
      }
    }
  }

  std::vector<Id> counts(nv + 1, 0);
  for (const auto& tri : t.triangles_) {
    for (Id v : tri) ++counts[v + 1];
  }
  for (std::size_t v = 0; v < nv; ++v) counts[v + 1] += counts[v];
  t.star_offsets_ = counts;
  t.star_elements_.resize(counts.back());
  for (std::size_t k = 0; k < nt; ++k) {
    for (Id v : t.triangles_[k]) t.star_elements_[counts[v]++] = static_cast<Id>(k);
  }
  return t;
}

std::array<Point2, 3> Triangulation::corners(Id k) const {
  const auto& tri = triangle(k);
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

Point2 Triangulation::barycenter(Id k) const {
  const auto c = corners(k);
  return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
}

std::optional<Id> Triangulation::find_edge(Id a, Id b) const {
  const auto key = edge_key(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& e, const std::pair<Id, Id>& k) {
    return std::pair{e.vertices[0], e.vertices[1]} < k;
  });
  if (it == edges_.end() || it->vertices[0] != key.first || it->vertices[1] != key.second) return std::nullopt;
  return static_cast<Id>(it - edges_.begin());
}

std::span<const Id> Triangulation::vertex_star(Id v) const {
  QMLOC_THROW_IF(v >= num_vertices(), ErrorCode::UnknownLocus, "vertex " + std::to_string(v));
  return std::span<const Id>(star_elements_).subspan(star_offsets_[v], star_offsets_[v + 1] - star_offsets_[v]);
}

double Triangulation::total_area() const noexcept {
  double s = 0.0;
  for (double a : area_) s += a;
  return s;
}

std::vector<Id> patch_of(const Triangulation& mesh, const Locus& locus) {
  return std::visit(
      [&](const auto& l) -> std::vector<Id> {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, VertexLocus>) {
          const auto star = mesh.vertex_star(l.vertex);
          return {star.begin(), star.end()};
        } else if constexpr (std::is_same_v<T, ElementLocus>) {
          QMLOC_THROW_IF(l.element >= mesh.num_triangles(), ErrorCode::UnknownLocus,
                         "element " + std::to_string(l.element));
          std::vector<Id> out;
          for (Id v : mesh.triangle(l.element)) {
            const auto star = mesh.vertex_star(v);
            out.insert(out.end(), star.begin(), star.end());
          }
          std::sort(out.begin(), out.end());
          out.erase(std::unique(out.begin(), out.end()), out.end());
          return out;
        } else {
          QMLOC_THROW_IF(l.edge >= mesh.num_edges(), ErrorCode::UnknownLocus, "edge " + std::to_string(l.edge));
          const auto& e = mesh.edge(l.edge);
          if (e.is_boundary()) return {e.triangles[0]};
          return {std::min(e.triangles[0], e.triangles[1]), std::max(e.triangles[0], e.triangles[1])};
        }
      },
      locus);
}

double shape_parameter(const Triangulation& mesh) { return mesh.shape_parameter(); }

Triangulation uniform_refine(const Triangulation& coarse) {
  std::vector<Point2> vertices(coarse.vertices().begin(), coarse.vertices().end());
  const auto nv = static_cast<Id>(vertices.size());
  for (const auto& e : coarse.edges()) {
    vertices.push_back(0.5 * (coarse.vertex(e.vertices[0]) + coarse.vertex(e.vertices[1])));
  }
  std::vector<std::array<Id, 3>> triangles;
  triangles.reserve(4 * coarse.num_triangles());
  for (std::size_t k = 0; k < coarse.num_triangles(); ++k) {
    const auto& t = coarse.triangle(static_cast<Id>(k));
    const auto& te = coarse.triangle_edges(static_cast<Id>(k));
    // te[i] is opposite t[i]: m12 = te[0], m20 = te[1], m01 = te[2].
    const Id m12 = nv + te[0], m20 = nv + te[1], m01 = nv + te[2];
    triangles.push_back({t[0], m01, m20});
    triangles.push_back({m01, t[1], m12});
    triangles.push_back({m20, m12, t[2]});
    triangles.push_back({m01, m12, m20});
  }
  Triangulation fine = Triangulation::build(std::move(vertices), std::move(triangles));
  fine.parents_.resize(fine.num_triangles());
  for (std::size_t k = 0; k < fine.num_triangles(); ++k) fine.parents_[k] = static_cast<Id>(k / 4);
  return fine;
}

}  // namespace qmloc
