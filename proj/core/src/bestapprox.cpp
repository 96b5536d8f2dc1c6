#include "qmloc/bestapprox.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "qmloc/error.hpp"

namespace qmloc {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

ElementMoments space_part(const LagrangeSpace& space, Id k) {
  ElementMoments m;
  m.stiffness = element_stiffness(space, k);
  m.mass = element_mass(space, k);
  m.basis_integrals = m.mass.rowwise().sum();
  m.grad_load = Eigen::VectorXd::Zero(m.mass.rows());
  m.value_load = Eigen::VectorXd::Zero(m.mass.rows());
  return m;
}

Eigen::VectorXd gather(const LagrangeSpace& space, Id k, const Eigen::VectorXd& global) {
  const auto nodes = space.element_nodes(k);
  Eigen::VectorXd local(ix(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) local[ix(i)] = global[nodes[i]];
  return local;
}

std::vector<Id> sorted_region(std::span<const Id> region, std::size_t num_elements) {
  std::vector<Id> r(region.begin(), region.end());
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  QMLOC_THROW_IF(r.empty(), ErrorCode::InvalidInput, "empty region");
  QMLOC_THROW_IF(r.back() >= num_elements, ErrorCode::UnknownLocus, "element " + std::to_string(r.back()));
  return r;
}

struct Weights {
  bool gradient = true;  // include a-weighted stiffness
  double beta = 0.0;     // mass weight
};

struct RegionSolve {
  double error_sq = 0.0;
  std::vector<Id> dofs;    // global ids of region nodes, ascending
  Eigen::VectorXd values;  // nodal values on dofs
  SolveResult solve;
};

double region_error(const TargetMoments& u, const Coefficient& a, std::span<const Id> region, Weights w,
                    const std::vector<Id>& dofs, const Eigen::VectorXd& values) {
  const LagrangeSpace& space = u.space();
  double total = 0.0;
  for (Id k : region) {
    const auto nodes = space.element_nodes(k);
    Eigen::VectorXd c(ix(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto pos = std::lower_bound(dofs.begin(), dofs.end(), nodes[i]) - dofs.begin();
      c[ix(i)] = values[pos];
    }
    if (w.gradient) total += element_energy_error(u[k], a[k], c);
    if (w.beta > 0.0) total += w.beta * element_l2_error(u[k], c);
  }
  return total;
}

// Minimizes the weighted error over the continuous space restricted to the
// region. Constrained nodes are held at zero; with no constraint and no mass
// term the smallest free node is pinned.
RegionSolve solve_region(const TargetMoments& u, const Coefficient& a, std::span<const Id> region, Weights w,
                         bool dirichlet, const SolverOptions& options) {
  const LagrangeSpace& space = u.space();
  RegionSolve out;
  for (Id k : region) {
    const auto nodes = space.element_nodes(k);
    out.dofs.insert(out.dofs.end(), nodes.begin(), nodes.end());
  }
  std::sort(out.dofs.begin(), out.dofs.end());
  out.dofs.erase(std::unique(out.dofs.begin(), out.dofs.end()), out.dofs.end());
  const std::size_t n = out.dofs.size();
  auto local_of = [&](Id z) { return static_cast<std::size_t>(std::lower_bound(out.dofs.begin(), out.dofs.end(), z) - out.dofs.begin()); };

  // Connectivity of the region through shared nodes.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Id k : region) {
    const auto nodes = space.element_nodes(k);
    const std::size_t root = find(local_of(nodes[0]));
    for (Id z : nodes) parent[find(local_of(z))] = root;
  }
  for (std::size_t i = 0; i < n; ++i) {
    QMLOC_THROW_IF(find(i) != find(0), ErrorCode::InvalidInput, "region is not connected");
  }

  std::vector<char> fixed(n, 0);
  bool any_fixed = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (dirichlet && space.node(out.dofs[i]).on_boundary) fixed[i] = 1, any_fixed = true;
  }
  if (!any_fixed && w.gradient && w.beta == 0.0) fixed[0] = 1;

  std::vector<Id> free_index(n, kNoId);
  std::size_t nfree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!fixed[i]) free_index[i] = static_cast<Id>(nfree++);
  }

  std::vector<Triplet> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ix(nfree));
  for (Id k : region) {
    const auto nodes = space.element_nodes(k);
    const ElementMoments& m = u[k];
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(m.mass.rows(), m.mass.cols());
    Eigen::VectorXd load = Eigen::VectorXd::Zero(m.mass.rows());
    if (w.gradient) {
      local += a[k] * m.stiffness;
      load += a[k] * m.grad_load;
    }
    if (w.beta > 0.0) {
      local += w.beta * m.mass;
      load += w.beta * m.value_load;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Id fi = free_index[local_of(nodes[i])];
      if (fi == kNoId) continue;
      rhs[fi] += load[ix(i)];
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const Id fj = free_index[local_of(nodes[j])];
        if (fj != kNoId) triplets.push_back({fi, fj, local(ix(i), ix(j))});
      }
    }
  }
  const CsrMatrix matrix = CsrMatrix::from_triplets(nfree, std::move(triplets));
  out.solve = solve_spd(matrix, rhs, options);

  out.values = Eigen::VectorXd::Zero(ix(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (free_index[i] != kNoId) out.values[ix(i)] = out.solve.x[free_index[i]];
  }
  out.error_sq = region_error(u, a, region, w, out.dofs, out.values);
  return out;
}

std::vector<Id> all_elements(std::size_t n) {
  std::vector<Id> r(n);
  std::iota(r.begin(), r.end(), Id{0});
  return r;
}

RitzResult global_solve(const TargetMoments& u, const Coefficient& a, Weights w, const SolverOptions& options) {
  const LagrangeSpace& space = u.space();
  QMLOC_THROW_IF(a.size() != space.mesh().num_triangles(), ErrorCode::InvalidInput, "coefficient/mesh size mismatch");
  const auto region = all_elements(space.mesh().num_triangles());
  RegionSolve s = solve_region(u, a, region, w, space.has_dirichlet(), options);

  RitzResult r;
  r.gauge = space.has_dirichlet() ? Gauge::Dirichlet : Gauge::MeanZero;
  r.solve = std::move(s.solve);
  r.coefficients = std::move(s.values);  // dofs cover every node
  if (r.gauge == Gauge::MeanZero && w.beta == 0.0) {
    double target = 0.0, discrete = 0.0;
    for (Id k : region) {
      target += u[k].integral;
      discrete += u[k].basis_integrals.dot(gather(space, k, r.coefficients));
    }
    r.coefficients.array() += (target - discrete) / space.mesh().total_area();
  }
  r.error_sq = s.error_sq;
  return r;
}

}  // namespace

TargetMoments TargetMoments::compute(const LagrangeSpace& space, const Field& u, const QuadraturePlan& plan) {
  plan.check_mesh(space.mesh());
  TargetMoments t;
  t.space_ = &space;
  const std::size_t nloc = space.local_size();
  std::vector<double> phi(nloc);
  std::vector<Vec2> dphi(nloc);
  std::vector<QuadPoint> pts;
  t.elements_.reserve(space.mesh().num_triangles());
  for (std::size_t k = 0; k < space.mesh().num_triangles(); ++k) {
    ElementMoments m = space_part(space, static_cast<Id>(k));
    pts.clear();
    plan.append_points(static_cast<Id>(k), pts);
    for (const auto& q : pts) {
      const double v = u.value(q.x);
      const Vec2 g = u.gradient(q.x);
      eval_basis_unchecked(space, static_cast<Id>(k), q.x, phi, dphi);
      m.grad_sq += q.weight * norm_sq(g);
      m.value_sq += q.weight * v * v;
      m.integral += q.weight * v;
      for (std::size_t i = 0; i < nloc; ++i) {
        m.grad_load[ix(i)] += q.weight * dot(g, dphi[i]);
        m.value_load[ix(i)] += q.weight * v * phi[i];
      }
    }
    t.elements_.push_back(std::move(m));
  }
  return t;
}

TargetMoments TargetMoments::of_discrete(const LagrangeSpace& space, const Eigen::VectorXd& coefficients) {
  QMLOC_THROW_IF(static_cast<std::size_t>(coefficients.size()) != space.num_nodes(), ErrorCode::InvalidInput,
                 "coefficient vector size mismatch");
  TargetMoments t;
  t.space_ = &space;
  for (std::size_t k = 0; k < space.mesh().num_triangles(); ++k) {
    ElementMoments m = space_part(space, static_cast<Id>(k));
    const Eigen::VectorXd c = gather(space, static_cast<Id>(k), coefficients);
    m.grad_load = m.stiffness * c;
    m.value_load = m.mass * c;
    m.grad_sq = c.dot(m.grad_load);
    m.value_sq = c.dot(m.value_load);
    m.integral = m.basis_integrals.dot(c);
    t.elements_.push_back(std::move(m));
  }
  return t;
}

double element_energy_error(const ElementMoments& m, double a_k, const Eigen::VectorXd& c) {
  return a_k * std::max(0.0, m.grad_sq - 2.0 * c.dot(m.grad_load) + c.dot(m.stiffness * c));
}

double element_l2_error(const ElementMoments& m, const Eigen::VectorXd& c) {
  return std::max(0.0, m.value_sq - 2.0 * c.dot(m.value_load) + c.dot(m.mass * c));
}

double energy_error(const TargetMoments& u, const Coefficient& a, std::span<const Id> region, const Eigen::VectorXd& v) {
  double total = 0.0;
  for (Id k : sorted_region(region, u.size())) total += element_energy_error(u[k], a[k], gather(u.space(), k, v));
  return total;
}

double energy_error(const TargetMoments& u, const Coefficient& a, const Eigen::VectorXd& v) {
  return energy_error(u, a, all_elements(u.size()), v);
}

double l2_error(const TargetMoments& u, std::span<const Id> region, const Eigen::VectorXd& v) {
  double total = 0.0;
  for (Id k : sorted_region(region, u.size())) total += element_l2_error(u[k], gather(u.space(), k, v));
  return total;
}

ElementFit local_element_error(const TargetMoments& u, const Coefficient& a, Id k, bool mean_match) {
  QMLOC_THROW_IF(k >= u.size(), ErrorCode::UnknownLocus, "element " + std::to_string(k));
  const ElementMoments& m = u[k];
  const Eigen::Index n = m.stiffness.rows();
  // Pin local node 0; the remaining block of the stiffness matrix is definite.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  c.tail(n - 1) = solve_dense_spd(m.stiffness.bottomRightCorner(n - 1, n - 1), m.grad_load.tail(n - 1));

  double shift = 0.0;
  const double area = u.space().mesh().area(k);
  if (mean_match) {
    shift = (m.integral - m.basis_integrals.dot(c)) / area;
  } else {
    std::vector<double> phi(static_cast<std::size_t>(n));
    std::vector<Vec2> none;
    eval_basis_unchecked(u.space(), k, u.space().mesh().barycenter(k), phi, none);
    const double at_center = Eigen::Map<const Eigen::VectorXd>(phi.data(), n).dot(c);
    shift = m.integral / area - at_center;
  }
  c.array() += shift;
  return {element_energy_error(m, a[k], c), c};
}

double local_region_error(const TargetMoments& u, const Coefficient& a, std::span<const Id> region,
                          RegionBoundary boundary, const SolverOptions& options) {
  const auto r = sorted_region(region, u.size());
  return solve_region(u, a, r, {true, 0.0}, boundary == RegionBoundary::Dirichlet, options).error_sq;
}

double local_region_l2_error(const TargetMoments& u, std::span<const Id> region, RegionBoundary boundary,
                             const SolverOptions& options) {
  const auto r = sorted_region(region, u.size());
  const Coefficient unit;  // unused by the mass-only form
  return solve_region(u, unit, r, {false, 1.0}, boundary == RegionBoundary::Dirichlet, options).error_sq;
}

RitzResult global_best_error(const TargetMoments& u, const Coefficient& a, const SolverOptions& options) {
  return global_solve(u, a, {true, 0.0}, options);
}

RitzResult global_combined_error(const TargetMoments& u, const Coefficient& a, double beta,
                                 const SolverOptions& options) {
  QMLOC_THROW_IF(!(beta >= 0.0) || !std::isfinite(beta), ErrorCode::InvalidInput, "beta must be finite and >= 0");
  return global_solve(u, a, {true, beta}, options);
}

RitzResult global_l2_error(const TargetMoments& u, const SolverOptions& options) {
  const Coefficient unit;
  const LagrangeSpace& space = u.space();
  RegionSolve s =
      solve_region(u, unit, all_elements(space.mesh().num_triangles()), {false, 1.0}, space.has_dirichlet(), options);
  RitzResult r;
  r.gauge = space.has_dirichlet() ? Gauge::Dirichlet : Gauge::MeanZero;
  r.error_sq = s.error_sq;
  r.coefficients = std::move(s.values);
  r.solve = std::move(s.solve);
  return r;
}

double ReactionDiffusionErrors::localized_sum() const {
  double grad = 0.0, l2 = 0.0;
  for (const auto& e : element_gradient) grad += e.error_sq;
  for (const auto& e : pair_l2) l2 += e.error_sq;
  return grad + beta * l2;
}

ReactionDiffusionErrors reaction_diffusion_errors(const TargetMoments& u, const Coefficient& a, double beta,
                                                  const SolverOptions& options) {
  ReactionDiffusionErrors out;
  out.beta = beta;
  out.combined_global_sq = global_combined_error(u, a, beta, options).error_sq;
  out.gradient_global_sq = global_best_error(u, a, options).error_sq;
  out.l2_global_sq = global_l2_error(u, options).error_sq;

  const Triangulation& mesh = u.space().mesh();
  const RegionBoundary bc = u.space().has_dirichlet() ? RegionBoundary::Dirichlet : RegionBoundary::None;
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    out.element_gradient.push_back({static_cast<Id>(k), local_element_error(u, a, static_cast<Id>(k)).error_sq});
  }
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(static_cast<Id>(e));
    if (edge.is_boundary()) continue;
    const std::array<Id, 2> pair{edge.triangles[0], edge.triangles[1]};
    out.pair_l2.push_back({static_cast<Id>(e), local_region_l2_error(u, pair, bc, options)});
  }
  return out;
}

}  // namespace qmloc
