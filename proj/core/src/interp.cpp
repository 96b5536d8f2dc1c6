#include "qmloc/interp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmloc/error.hpp"
#include "qmloc/quadrature.hpp"

namespace qmloc {

std::string_view to_string(NodeSource s) noexcept {
  switch (s) {
    case NodeSource::InteriorBestFit: return "interior-best-fit";
    case NodeSource::FaceDual: return "face-dual";
    case NodeSource::ElementDual: return "element-dual";
    case NodeSource::BoundaryZero: return "boundary-zero";
  }
  return "unknown";
}

namespace {

InterpolantResult blank(const LagrangeSpace& space) {
  InterpolantResult r;
  r.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.num_nodes()));
  r.source.assign(space.num_nodes(), NodeSource::BoundaryZero);
  r.kmax.assign(space.num_nodes(), kNoId);
  r.face.assign(space.num_nodes(), kNoId);
  return r;
}

std::size_t local_index(std::span<const Id> nodes, Id z) {
  const auto it = std::find(nodes.begin(), nodes.end(), z);
  QMLOC_THROW_IF(it == nodes.end(), ErrorCode::LocusMismatch, "node " + std::to_string(z) + " not in element");
  return static_cast<std::size_t>(it - nodes.begin());
}

// int_F u psi_z^F for every node on F, in edge_nodes order.
Eigen::VectorXd face_moments(const Field& u, const LagrangeSpace& space, Id edge, int points) {
  const Edge& e = space.mesh().edge(edge);
  const Point2& p = space.mesh().vertex(e.vertices[0]);
  const Point2& q = space.mesh().vertex(e.vertices[1]);
  const double len = distance(p, q);
  const int l = space.degree();
  const LineRule& g = gauss_legendre(points);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(l + 1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double t = g.nodes[i];
    const double v = u.value((1.0 - t) * p + t * q);
    for (int j = 0; j <= l; ++j) load[j] += len * g.weights[i] * v * eval_edge_basis(l, j, t);
  }
  return face_dual_basis(space, edge) * load;
}

}  // namespace

InterpolantResult quasi_interpolate(const Field& u, const TargetMoments& moments, const Coefficient& a,
                                    int edge_points) {
  const LagrangeSpace& space = moments.space();
  const int points = edge_points > 0 ? edge_points : space.degree() + 12;
  InterpolantResult r = blank(space);
  std::vector<std::optional<Eigen::VectorXd>> face_cache(space.mesh().num_edges());
  std::vector<std::optional<Eigen::VectorXd>> fit_cache(space.mesh().num_triangles());

  for (std::size_t zi = 0; zi < space.num_nodes(); ++zi) {
    const Id z = static_cast<Id>(zi);
    if (space.is_constrained(z)) continue;
    const Node& node = space.node(z);
    if (node.kind == NodeKind::Interior) {
      const Id k = node.entity;
      if (!fit_cache[k]) fit_cache[k] = local_element_error(moments, a, k, true).coefficients;
      r.coefficients[z] = (*fit_cache[k])[static_cast<Eigen::Index>(local_index(space.element_nodes(k), z))];
      r.source[z] = NodeSource::InteriorBestFit;
      continue;
    }
    const Id f = *select_fz(space, a, z);
    if (!face_cache[f]) face_cache[f] = face_moments(u, space, f, points);
    const auto on_face = space.edge_nodes(f);
    const auto pos = std::find(on_face.begin(), on_face.end(), z) - on_face.begin();
    r.coefficients[z] = (*face_cache[f])[pos];
    r.source[z] = NodeSource::FaceDual;
    r.kmax[z] = select_kmax(space, a, z);
    r.face[z] = f;
  }
  return r;
}

InterpolantResult l2_quasi_interpolate(const TargetMoments& moments, const Coefficient& a) {
  const LagrangeSpace& space = moments.space();
  InterpolantResult r = blank(space);
  std::vector<std::optional<Eigen::VectorXd>> dual_moments(space.mesh().num_triangles());
  for (std::size_t zi = 0; zi < space.num_nodes(); ++zi) {
    const Id z = static_cast<Id>(zi);
    if (space.is_constrained(z)) continue;
    const Id k = select_kmax(space, a, z);
    if (!dual_moments[k]) dual_moments[k] = element_dual_basis(space, k) * moments[k].value_load;
    r.coefficients[z] = (*dual_moments[k])[static_cast<Eigen::Index>(local_index(space.element_nodes(k), z))];
    r.source[z] = NodeSource::ElementDual;
    r.kmax[z] = k;
  }
  return r;
}

nlohmann::ordered_json OperatorReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["operator"] = kind == OperatorKind::Pi ? "Pi" : "PiTilde";
  doc["error_sq"] = error_sq;
  doc["patch_local_sum"] = patch_local_sum;
  doc["near_best_ratio"] = near_best_ratio;
  doc["l2_ratio"] = l2_ratio;
  doc["energy_ratio"] = energy_ratio ? nlohmann::ordered_json(*energy_ratio) : nlohmann::ordered_json();
  doc["element_error_sq"] = element_error_sq;
  doc["patch_local_sq"] = patch_local_sq;
  if (!omega_hat_sizes.empty()) doc["omega_hat_sizes"] = omega_hat_sizes;
  return doc;
}

OperatorReport operator_report(const TargetMoments& moments, const Coefficient& a, const InterpolantResult& iu,
                               OperatorKind kind, bool energy_diagnostic) {
  const LagrangeSpace& space = moments.space();
  const Triangulation& mesh = space.mesh();
  QMLOC_THROW_IF(static_cast<std::size_t>(iu.coefficients.size()) != space.num_nodes(), ErrorCode::InvalidInput,
                 "interpolant does not match the space");
  OperatorReport rep;
  rep.kind = kind;

  if (energy_diagnostic) {
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
      rep.omega_hat_sizes.push_back(build_omega_hat(space, a, static_cast<Id>(k)).size());
    }
  }

  std::vector<double> local(mesh.num_triangles());
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) local[k] = local_element_error(moments, a, static_cast<Id>(k)).error_sq;

  double norm_u_sq = 0.0, norm_iu_sq = 0.0, energy_u = 0.0, energy_iu = 0.0;
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    const Id kid = static_cast<Id>(k);
    const auto nodes = space.element_nodes(kid);
    Eigen::VectorXd c(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) c[static_cast<Eigen::Index>(i)] = iu.coefficients[nodes[i]];
    const ElementMoments& m = moments[kid];
    const double err = element_energy_error(m, a[kid], c);
    rep.element_error_sq.push_back(err);
    rep.error_sq += err;

    double patch = 0.0;
    for (Id kp : patch_of(mesh, ElementLocus{kid})) patch += local[kp];
    rep.patch_local_sq.push_back(patch);
    rep.patch_local_sum += patch;

    norm_u_sq += m.value_sq;
    norm_iu_sq += c.dot(m.mass * c);
    energy_u += a[kid] * m.grad_sq;
    energy_iu += a[kid] * c.dot(m.stiffness * c);
  }
  rep.near_best_ratio = rep.patch_local_sum > 0.0 ? rep.error_sq / rep.patch_local_sum : 0.0;
  rep.l2_ratio = norm_u_sq > 0.0 ? std::sqrt(norm_iu_sq / norm_u_sq) : 0.0;
  if (energy_diagnostic) rep.energy_ratio = energy_u > 0.0 ? std::sqrt(energy_iu / energy_u) : 0.0;
  return rep;
}

}  // namespace qmloc
