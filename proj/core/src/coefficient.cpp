#include "qmloc/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "qmloc/error.hpp"

namespace qmloc {

Coefficient Coefficient::attach(const Triangulation& mesh, std::vector<double> values) {
  QMLOC_THROW_IF(values.size() != mesh.num_triangles(), ErrorCode::InvalidInput,
                 "expected " + std::to_string(mesh.num_triangles()) + " coefficient values, got " +
                     std::to_string(values.size()));
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double v = values[k];
    QMLOC_THROW_IF(!std::isfinite(v), ErrorCode::InvalidInput, "coefficient on element " + std::to_string(k) + " is not finite");
    QMLOC_THROW_IF(v <= 0.0, ErrorCode::NonPositiveValue, "coefficient on element " + std::to_string(k));
    lo = k == 0 ? v : std::min(lo, v);
    hi = k == 0 ? v : std::max(hi, v);
  }
  Coefficient c;
  c.values_ = std::move(values);
  c.alpha_ = lo / hi;
  return c;
}

Coefficient Coefficient::scaled(double factor) const {
  QMLOC_THROW_IF(!(factor > 0.0), ErrorCode::NonPositiveValue, "scale factor must be positive");
  Coefficient c = *this;
  for (auto& v : c.values_) v *= factor;
  return c;
}

Coefficient Coefficient::refined(const Triangulation& fine) const {
  const auto parents = fine.parents();
  QMLOC_THROW_IF(parents.size() != fine.num_triangles(), ErrorCode::InvalidInput, "mesh carries no parent map");
  std::vector<double> v(parents.size());
  for (std::size_t k = 0; k < parents.size(); ++k) {
    QMLOC_THROW_IF(parents[k] >= values_.size(), ErrorCode::InvalidInput, "parent map does not match coefficient");
    v[k] = values_[parents[k]];
  }
  Coefficient c;
  c.values_ = std::move(v);
  c.alpha_ = alpha_;
  return c;
}

namespace {

bool in_star(std::span<const Id> star, Id k) { return std::binary_search(star.begin(), star.end(), k); }

// Edge-neighbours of k inside the star, ascending.
std::vector<std::pair<Id, Id>> star_neighbours(const Triangulation& mesh, std::span<const Id> star, Id k) {
  std::vector<std::pair<Id, Id>> out;  // (element, shared edge)
  for (Id e : mesh.triangle_edges(k)) {
    const Edge& edge = mesh.edge(e);
    if (edge.is_boundary()) continue;
    const Id other = edge.triangles[0] == k ? edge.triangles[1] : edge.triangles[0];
    if (in_star(star, other)) out.emplace_back(other, e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Id> sorted_copy(std::span<const Id> s) {
  std::vector<Id> v(s.begin(), s.end());
  std::sort(v.begin(), v.end());
  return v;
}

// Elements of the star reachable from `from` along non-decreasing steps.
std::vector<char> monotone_reach(const Triangulation& mesh, const Coefficient& a, std::span<const Id> star, Id from) {
  std::vector<char> seen(star.size(), 0);
  auto index = [&](Id k) { return static_cast<std::size_t>(std::lower_bound(star.begin(), star.end(), k) - star.begin()); };
  std::deque<Id> queue{from};
  seen[index(from)] = 1;
  while (!queue.empty()) {
    const Id k = queue.front();
    queue.pop_front();
    for (const auto& [n, e] : star_neighbours(mesh, star, k)) {
      if (a[k] <= a[n] && !seen[index(n)]) {
        seen[index(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return seen;
}

void check_star(const Triangulation& mesh, const Coefficient& a, Id node, std::span<const Id> star, QmReport& report) {
  bool ok = true;
  for (Id from : star) {
    const auto reach = monotone_reach(mesh, a, star, from);
    for (std::size_t j = 0; j < star.size(); ++j) {
      const Id to = star[j];
      if (to == from || a[from] > a[to]) continue;
      if (!reach[j]) {
        ok = false;
        report.witnesses.push_back({node, from, to});
      }
    }
  }
  report.nodes.push_back({node, ok});
  report.quasi_monotone = report.quasi_monotone && ok;
}

}  // namespace

nlohmann::ordered_json QmReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["quasi_monotone"] = quasi_monotone;
  std::size_t failing = 0;
  for (const auto& n : nodes) failing += n.quasi_monotone ? 0 : 1;
  doc["nodes_checked"] = nodes.size();
  doc["nodes_failing"] = failing;
  auto& bad = doc["failing_nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : nodes) {
    if (!n.quasi_monotone) bad.push_back(n.node);
  }
  auto& w = doc["witnesses"] = nlohmann::ordered_json::array();
  for (const auto& x : witnesses) w.push_back({{"node", x.node}, {"from", x.from}, {"to", x.to}});
  return doc;
}

QmReport check_quasi_monotonicity(const LagrangeSpace& space, const Coefficient& a) {
  QMLOC_THROW_IF(a.size() != space.mesh().num_triangles(), ErrorCode::InvalidInput, "coefficient/mesh size mismatch");
  QmReport report;
  for (std::size_t z = 0; z < space.num_nodes(); ++z) {
    const auto star = space.node_star(static_cast<Id>(z));
    check_star(space.mesh(), a, static_cast<Id>(z), star, report);
  }
  return report;
}

QmReport check_quasi_monotonicity(const Triangulation& mesh, const Coefficient& a) {
  QMLOC_THROW_IF(a.size() != mesh.num_triangles(), ErrorCode::InvalidInput, "coefficient/mesh size mismatch");
  QmReport report;
  for (std::size_t z = 0; z < mesh.num_vertices(); ++z) {
    const auto star = sorted_copy(mesh.vertex_star(static_cast<Id>(z)));
    check_star(mesh, a, static_cast<Id>(z), star, report);
  }
  return report;
}

std::optional<MonotonePath> find_monotone_path(const Triangulation& mesh, const Coefficient& a,
                                               std::span<const Id> star_in, Id from, Id to) {
  const auto star = sorted_copy(star_in);
  QMLOC_THROW_IF(!in_star(star, from) || !in_star(star, to), ErrorCode::LocusMismatch,
                 "elements " + std::to_string(from) + ", " + std::to_string(to) + " must lie in the star");
  auto index = [&](Id k) { return static_cast<std::size_t>(std::lower_bound(star.begin(), star.end(), k) - star.begin()); };

  // Distances to `to` along reversed monotone steps.
  constexpr std::size_t kInf = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(star.size(), kInf);
  dist[index(to)] = 0;
  std::deque<Id> queue{to};
  while (!queue.empty()) {
    const Id k = queue.front();
    queue.pop_front();
    for (const auto& [n, e] : star_neighbours(mesh, star, k)) {
      if (a[n] <= a[k] && dist[index(n)] == kInf) {
        dist[index(n)] = dist[index(k)] + 1;
        queue.push_back(n);
      }
    }
  }
  if (dist[index(from)] == kInf) return std::nullopt;

  MonotonePath path;
  path.elements.push_back(from);
  Id k = from;
  while (k != to) {
    for (const auto& [n, e] : star_neighbours(mesh, star, k)) {
      if (a[k] <= a[n] && dist[index(n)] + 1 == dist[index(k)]) {
        path.elements.push_back(n);
        path.shared_edges.push_back(e);
        k = n;
        break;
      }
    }
  }
  return path;
}

std::optional<MonotonePath> find_monotone_path(const Triangulation& mesh, const Coefficient& a, Id vertex, Id from,
                                               Id to) {
  return find_monotone_path(mesh, a, mesh.vertex_star(vertex), from, to);
}

namespace {

Id argmax_in(std::span<const Id> star, const Coefficient& a) {
  Id best = kNoId;
  for (Id k : star) {
    if (best == kNoId || a[k] > a[best] || (a[k] == a[best] && k < best)) best = k;
  }
  return best;
}

}  // namespace

Id select_kmax(const LagrangeSpace& space, const Coefficient& a, Id node) {
  return argmax_in(space.node_star(node), a);
}

Id select_kmax(const Triangulation& mesh, const Coefficient& a, Id vertex) {
  return argmax_in(mesh.vertex_star(vertex), a);
}

std::optional<Id> select_fz(const LagrangeSpace& space, const Coefficient& a, Id node) {
  const Node& n = space.node(node);
  if (n.kind == NodeKind::Interior) return std::nullopt;
  if (n.kind == NodeKind::Edge) return n.entity;
  const Id kmax = select_kmax(space, a, node);
  Id best = kNoId;
  for (Id e : space.mesh().triangle_edges(kmax)) {
    const auto& ev = space.mesh().edge(e).vertices;
    if ((ev[0] == n.entity || ev[1] == n.entity) && e < best) best = e;
  }
  return best;
}

std::vector<Id> build_omega_hat(const LagrangeSpace& space, const Coefficient& a, Id element) {
  std::vector<Id> out;
  for (Id z : space.element_nodes(element)) {
    const auto star = space.node_star(z);
    const Id kmax = select_kmax(space, a, z);
    const auto path = find_monotone_path(space.mesh(), a, star, element, kmax);
    if (!path) {
      throw Error(ErrorCode::NoMonotonePath, "no monotone path from element " + std::to_string(element) +
                                                 " to K_max=" + std::to_string(kmax) + " at node " + std::to_string(z));
    }
    out.insert(out.end(), path->elements.begin(), path->elements.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace qmloc
