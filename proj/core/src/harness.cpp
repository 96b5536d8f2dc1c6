#include "qmloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include "qmloc/bestapprox.hpp"
#include "qmloc/coefficient.hpp"
#include "qmloc/error.hpp"
#include "qmloc/fespace.hpp"
#include "qmloc/interp.hpp"

namespace qmloc {

using ojson = nlohmann::ordered_json;

QuadratureOptions quadrature_options_from_env() {
  QuadratureOptions q;
  if (const char* env = std::getenv("QMLOC_RTOL"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    QMLOC_THROW_IF(end == env || *end != '\0' || !std::isfinite(v) || !(v > 0.0), ErrorCode::InvalidInput,
                   std::string("QMLOC_RTOL='") + env + "' is not a positive number");
    q.rtol = v;
  }
  return q;
}

HarnessOptions default_harness_options() {
  HarnessOptions o;
  o.quadrature = quadrature_options_from_env();
  return o;
}

double spread(const std::vector<double>& values) {
  QMLOC_THROW_IF(values.empty(), ErrorCode::InvalidInput, "spread of an empty list");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  QMLOC_THROW_IF(!(*lo > 0.0), ErrorCode::InvalidInput, "spread needs positive values");
  return *hi / *lo;
}

namespace {

ojson base_metadata(const HarnessOptions& opt, const char* gauge) {
  ojson m;
  m["degree"] = opt.degree;
  m["gauge"] = gauge;
  m["quadrature_rtol"] = opt.quadrature.rtol;
  m["grading_ratio"] = opt.quadrature.grading_ratio;
  m["solver_rtol"] = opt.solver.rtol;
  m["tie_break"] = "smallest id";
  return m;
}

LocusSet element_loci(const TargetMoments& u, const Coefficient& a) {
  LocusSet s{LocusKind::Element, {}};
  for (std::size_t k = 0; k < u.size(); ++k) {
    s.entries.push_back({static_cast<Id>(k), local_element_error(u, a, static_cast<Id>(k)).error_sq, {}, {}});
  }
  return s;
}

LocusSet pair_loci(const TargetMoments& u, const Coefficient& a, const SolverOptions& solver) {
  const Triangulation& mesh = u.space().mesh();
  LocusSet s{LocusKind::Pair, {}};
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(static_cast<Id>(e));
    if (edge.is_boundary()) continue;
    const std::array<Id, 2> pair{edge.triangles[0], edge.triangles[1]};
    s.entries.push_back({static_cast<Id>(e), local_region_error(u, a, pair, RegionBoundary::None, solver), {}, {}});
  }
  return s;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void add_lower_bound_check(LocalizationReport& r) {
  const LocusSet* el = r.find(LocusKind::Element);
  if (el == nullptr) return;
  r.diagnostics["element_lower_bound_holds"] = el->sum() <= r.global_error_sq * (1.0 + 1e-8) + 1e-300;
}

void add_qm(LocalizationReport& r, const LagrangeSpace& space, const Coefficient& a) {
  const QmReport qm = check_quasi_monotonicity(space, a);
  r.quasi_monotone = qm.quasi_monotone;
  r.diagnostics["qm_witnesses"] = qm.witnesses.size();
  if (!qm.witnesses.empty()) {
    const auto& w = qm.witnesses.front();
    r.diagnostics["qm_first_witness"] = {{"node", w.node}, {"from", w.from}, {"to", w.to}};
  }
}

ojson polar_levels(const QuadraturePlan& plan) {
  ojson levels = ojson::array();
  for (std::size_t k = 0; k < plan.num_elements(); ++k) {
    const auto& rule = plan.rule(static_cast<Id>(k));
    if (rule.kind == ElementRule::Kind::Polar) levels.push_back({{"element", k}, {"levels", rule.levels}});
  }
  return levels;
}

std::string with_param(const std::string& what, const char* name, double value) {
  return what + " (" + name + " = " + format_number(value) + ")";
}

// Runs `body`, prefixing any library error with the sweep point.
template <class F>
auto at_point(const char* name, double value, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), with_param(e.detail(), name, value));
  }
}

}  // namespace

std::vector<LocalizationReport> run_hexagon_sweep(const std::vector<double>& eps, const HarnessOptions& opt) {
  QMLOC_THROW_IF(eps.empty(), ErrorCode::InvalidInput, "empty eps list");
  std::vector<LocalizationReport> out;
  for (double e : eps) {
    out.push_back(at_point("eps", e, [&] {
      const HexagonTarget u(e);
      const CoefficientMesh cm = hexagon_mesh(e);
      const LagrangeSpace space = LagrangeSpace::build(cm.mesh, opt.degree, true);
      const QuadraturePlan plan = make_quadrature_plan(cm.mesh, u, 2 * opt.degree + 2, opt.quadrature);
      const TargetMoments mom = TargetMoments::compute(space, u, plan);
      const RitzResult ritz = global_best_error(mom, cm.a, opt.solver);

      LocalizationReport r;
      r.experiment = "hexagon";
      r.parameters["eps"] = e;
      r.metadata = base_metadata(opt, "dirichlet");
      r.metadata["pair_boundary"] = "none";
      r.metadata["star_boundary"] = "dirichlet";
      r.metadata["threshold_global_variation"] = 0.2;
      r.metadata["threshold_ratio_growth_per_halving"] = 1.4;
      r.global_error_sq = ritz.error_sq;
      r.loci.push_back(element_loci(mom, cm.a));
      r.loci.push_back(pair_loci(mom, cm.a, opt.solver));

      LocusSet stars{LocusKind::Star, {}};
      for (std::size_t v = 0; v < cm.mesh.num_vertices(); ++v) {
        if (cm.mesh.is_boundary_vertex(static_cast<Id>(v))) continue;
        stars.entries.push_back({static_cast<Id>(v),
                                 local_region_error(mom, cm.a, cm.mesh.vertex_star(static_cast<Id>(v)),
                                                    RegionBoundary::Dirichlet, opt.solver),
                                 {},
                                 {}});
      }
      r.loci.push_back(std::move(stars));

      double energy = 0.0;
      for (std::size_t k = 0; k < mom.size(); ++k) energy += cm.a[static_cast<Id>(k)] * mom[static_cast<Id>(k)].grad_sq;
      r.diagnostics["target_energy_sq"] = energy;
      r.diagnostics["max_abs_ritz_coefficient"] = max_abs(ritz.coefficients);
      r.diagnostics["solver_iterations"] = ritz.solve.iterations;
      r.diagnostics["polar_levels"] = polar_levels(plan);
      add_qm(r, space, cm.a);
      add_lower_bound_check(r);
      return r;
    }));
  }
  return out;
}

namespace {

int star_type(int i, int j) {
  const bool oi = i % 2 == 1, oj = j % 2 == 1;
  if (oi && oj) return 1;
  if (oi || oj) return 2;
  return 3;
}

// Comparison function for the star of grid vertex (i, j) on the 2N-grid:
// nodal values of +-1/N next to the vertex, zero elsewhere and on the
// domain boundary.
Eigen::VectorXd star_candidate(const Triangulation& mesh, int n, int i, int j) {
  const int m = 2 * n;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  auto set = [&](int di, int dj, double value) {
    const int ii = i + di, jj = j + dj;
    if (ii <= 0 || jj <= 0 || ii >= m || jj >= m) return;
    v[jj * (m + 1) + ii] = value;
  };
  const double s = 1.0 / n;
  const bool oi = i % 2 == 1, oj = j % 2 == 1;
  if (oi && oj) {
    set(1, 0, -s), set(0, 1, -s), set(-1, 0, s), set(0, -1, s);
  } else if (oi) {  // on a horizontal macro edge
    set(0, -1, s), set(0, 1, -s);
  } else if (oj) {  // on a vertical macro edge
    set(-1, 0, s), set(1, 0, -s);
  }
  return v;
}

}  // namespace

std::vector<LocalizationReport> run_star_sweep(const std::vector<int>& ns, const HarnessOptions& opt) {
  QMLOC_THROW_IF(ns.empty(), ErrorCode::InvalidInput, "empty N list");
  std::vector<LocalizationReport> out;
  for (int n : ns) {
    QMLOC_THROW_IF(n < 2 || n > 16, ErrorCode::ParameterOutOfRange, "N = " + std::to_string(n) + " outside [2, 16]");
    out.push_back(at_point("N", n, [&] {
      const CheckerboardTarget u(n);
      const CoefficientMesh cm = checkerboard_mesh(n);
      const LagrangeSpace space = LagrangeSpace::build(cm.mesh, opt.degree, true);
      const QuadraturePlan plan = make_quadrature_plan(cm.mesh, u, 2 * opt.degree + 2, opt.quadrature);
      const TargetMoments mom = TargetMoments::compute(space, u, plan);
      const RitzResult ritz = global_best_error(mom, cm.a, opt.solver);

      LocalizationReport r;
      r.experiment = "stars";
      r.parameters["N"] = n;
      r.metadata = base_metadata(opt, "dirichlet");
      r.metadata["star_boundary"] = "dirichlet";
      r.metadata["candidate_boundary_values"] = "zero";
      r.metadata["threshold_global_variation"] = 0.2;
      r.metadata["threshold_star_sum_reduction"] = 0.5;
      r.global_error_sq = ritz.error_sq;

      LocusSet stars{LocusKind::Star, {}};
      const int m = 2 * n;
      bool candidates_bound = true;
      for (std::size_t vi = 0; vi < cm.mesh.num_vertices(); ++vi) {
        const Id v = static_cast<Id>(vi);
        if (cm.mesh.is_boundary_vertex(v)) continue;
        const int i = static_cast<int>(vi) % (m + 1), j = static_cast<int>(vi) / (m + 1);
        const auto star = cm.mesh.vertex_star(v);
        LocusEntry e{v, local_region_error(mom, cm.a, star, RegionBoundary::Dirichlet, opt.solver), {}, star_type(i, j)};
        if (opt.degree == 1) {
          e.candidate_sq = energy_error(mom, cm.a, star, star_candidate(cm.mesh, n, i, j));
          candidates_bound = candidates_bound && e.error_sq <= *e.candidate_sq * (1.0 + 1e-10) + 1e-300;
        }
        stars.entries.push_back(e);
      }
      r.loci.push_back(std::move(stars));

      r.diagnostics["max_abs_ritz_coefficient"] = max_abs(ritz.coefficients);
      r.diagnostics["solver_iterations"] = ritz.solve.iterations;
      if (opt.degree == 1) r.diagnostics["candidates_bound_minima"] = candidates_bound;
      add_qm(r, space, cm.a);
      return r;
    }));
  }
  return out;
}

CoefficientMesh make_pattern(const std::string& pattern, double alpha, int refinements) {
  QMLOC_THROW_IF(!(alpha > 0.0 && alpha <= 1.0), ErrorCode::ParameterOutOfRange,
                 "alpha = " + format_number(alpha) + " outside (0, 1]");
  if (pattern == "graded") return refine(layered_quadrants(alpha), refinements);
  if (pattern == "alternating") {
    CoefficientMesh cm = alternating_quadrants(1.0);
    cm.a = Coefficient::attach(cm.mesh, {1.0, alpha, 1.0, alpha});
    return refine(cm, refinements);
  }
  throw Error(ErrorCode::InvalidInput, "unknown pattern '" + pattern + "' (expected graded or alternating)");
}

namespace {

void require_qm(const LagrangeSpace& space, const Coefficient& a, const std::string& pattern, double alpha) {
  const QmReport qm = check_quasi_monotonicity(space, a);
  QMLOC_THROW_IF(!qm.quasi_monotone, ErrorCode::RefusesNonQM,
                 "pattern '" + pattern + "' is not quasi-monotone at alpha = " + format_number(alpha));
}

}  // namespace

std::vector<LocalizationReport> run_alpha_robustness(const std::string& pattern, const std::vector<double>& alphas,
                                                     const std::vector<std::string>& targets,
                                                     const HarnessOptions& opt) {
  QMLOC_THROW_IF(alphas.empty() || targets.empty(), ErrorCode::InvalidInput, "empty alpha or target list");
  std::vector<LocalizationReport> out;
  for (double alpha : alphas) {
    const CoefficientMesh cm = make_pattern(pattern, alpha, opt.refinements);
    const LagrangeSpace space = LagrangeSpace::build(cm.mesh, opt.degree, false);
    require_qm(space, cm.a, pattern, alpha);
    const QuadraturePlan plan = make_quadrature_plan(cm.mesh, std::max(opt.smooth_exactness, 2 * opt.degree));
    for (const auto& name : targets) {
      const auto u = smooth_target(name);
      out.push_back(at_point("alpha", alpha, [&] {
        const TargetMoments mom = TargetMoments::compute(space, *u, plan);
        const RitzResult ritz = global_best_error(mom, cm.a, opt.solver);
        const InterpolantResult pi = quasi_interpolate(*u, mom, cm.a);
        const OperatorReport op = operator_report(mom, cm.a, pi, OperatorKind::Pi);

        LocalizationReport r;
        r.experiment = "alpha";
        r.parameters["alpha"] = alpha;
        r.parameters["target"] = name;
        r.metadata = base_metadata(opt, "mean-zero");
        r.metadata["pattern"] = pattern;
        r.metadata["refinements"] = opt.refinements;
        r.metadata["elements"] = cm.mesh.num_triangles();
        r.metadata["threshold_spread"] = 2.0;
        r.global_error_sq = ritz.error_sq;
        r.loci.push_back(element_loci(mom, cm.a));
        r.extra["pi_error_sq"] = op.error_sq;
        r.extra["patch_local_sum"] = op.patch_local_sum;
        r.extra["near_best_ratio"] = op.near_best_ratio;
        r.diagnostics["pi_upper_bound_holds"] = ritz.error_sq <= op.error_sq + 1e-10;
        r.diagnostics["solver_iterations"] = ritz.solve.iterations;
        add_qm(r, space, cm.a);
        add_lower_bound_check(r);
        return r;
      }));
    }
  }
  return out;
}

std::vector<LocalizationReport> run_reaction_diffusion(const std::string& pattern, const std::vector<double>& alphas,
                                                       const std::vector<double>& betas,
                                                       const std::vector<std::string>& targets,
                                                       const HarnessOptions& opt) {
  QMLOC_THROW_IF(alphas.empty() || betas.empty() || targets.empty(), ErrorCode::InvalidInput,
                 "empty alpha, beta or target list");
  for (double b : betas) {
    QMLOC_THROW_IF(!(b >= 0.0) || !std::isfinite(b), ErrorCode::ParameterOutOfRange,
                   "beta = " + format_number(b) + " must be finite and >= 0");
  }
  std::vector<LocalizationReport> out;
  for (double alpha : alphas) {
    const CoefficientMesh cm = make_pattern(pattern, alpha, opt.refinements);
    const LagrangeSpace space = LagrangeSpace::build(cm.mesh, opt.degree, false);
    require_qm(space, cm.a, pattern, alpha);
    const QuadraturePlan plan = make_quadrature_plan(cm.mesh, std::max(opt.smooth_exactness, 2 * opt.degree));
    for (const auto& name : targets) {
      const auto u = smooth_target(name);
      const TargetMoments mom = TargetMoments::compute(space, *u, plan);
      for (double beta : betas) {
        out.push_back(at_point("beta", beta, [&] {
          const ReactionDiffusionErrors rd = reaction_diffusion_errors(mom, cm.a, beta, opt.solver);
          LocalizationReport r;
          r.experiment = "rd";
          r.parameters["alpha"] = alpha;
          r.parameters["beta"] = beta;
          r.parameters["target"] = name;
          r.metadata = base_metadata(opt, "none");
          r.metadata["pattern"] = pattern;
          r.metadata["refinements"] = opt.refinements;
          r.metadata["pair_norm"] = "L2";
          r.metadata["element_norm"] = "weighted gradient";
          r.metadata["threshold_equivalence_spread"] = 4.0;
          r.global_error_sq = rd.combined_global_sq;
          LocusSet el{LocusKind::Element, {}}, pr{LocusKind::Pair, {}};
          for (const auto& e : rd.element_gradient) el.entries.push_back({e.id, e.error_sq, {}, {}});
          for (const auto& e : rd.pair_l2) pr.entries.push_back({e.id, e.error_sq, {}, {}});
          r.loci.push_back(std::move(el));
          r.loci.push_back(std::move(pr));
          const double localized = rd.localized_sum();
          const double split = rd.gradient_global_sq + beta * rd.l2_global_sq;
          r.extra["gradient_global_sq"] = rd.gradient_global_sq;
          r.extra["l2_global_sq"] = rd.l2_global_sq;
          r.extra["localized_sum"] = localized;
          r.extra["equivalence_ratio"] = localized > 0.0 ? ojson(rd.combined_global_sq / localized) : ojson();
          r.extra["splitting_ratio"] = split > 0.0 ? ojson(rd.combined_global_sq / split) : ojson();
          add_qm(r, space, cm.a);
          return r;
        }));
      }
    }
  }
  return out;
}

namespace {

struct PolySample {
  int degree;
  std::vector<double> c;  // coefficients of X^p Y^q, p + q <= degree, p + q >= 1
  Point2 center;
  double h;

  [[nodiscard]] double value(const Point2& x) const {
    const double X = (x.x - center.x) / h, Y = (x.y - center.y) / h;
    double v = 0.0;
    std::size_t idx = 0;
    for (int d = 1; d <= degree; ++d) {
      for (int p = d; p >= 0; --p) v += c[idx++] * std::pow(X, p) * std::pow(Y, d - p);
    }
    return v;
  }
  [[nodiscard]] Vec2 gradient(const Point2& x) const {
    const double X = (x.x - center.x) / h, Y = (x.y - center.y) / h;
    Vec2 g{0.0, 0.0};
    std::size_t idx = 0;
    for (int d = 1; d <= degree; ++d) {
      for (int p = d; p >= 0; --p) {
        const int q = d - p;
        const double cc = c[idx++];
        if (p > 0) g.x += cc * p * std::pow(X, p - 1) * std::pow(Y, q) / h;
        if (q > 0) g.y += cc * q * std::pow(X, p) * std::pow(Y, q - 1) / h;
      }
    }
    return g;
  }
};

}  // namespace

nlohmann::ordered_json ConstantsRecord::to_json() const {
  ojson doc;
  doc["degree"] = degree;
  auto& ls = doc["levels"] = ojson::array();
  for (const auto& l : levels) {
    ls.push_back({{"level", l.level},
                  {"h", l.h},
                  {"sigma", l.sigma},
                  {"phi_scaled_min", l.phi_scaled_min},
                  {"phi_scaled_max", l.phi_scaled_max},
                  {"dual_scaled_min", l.dual_scaled_min},
                  {"dual_scaled_max", l.dual_scaled_max},
                  {"trace_constant", l.trace_constant},
                  {"poincare_constant", l.poincare_constant}});
  }
  doc["trace_spread"] = trace_spread;
  doc["poincare_spread"] = poincare_spread;
  doc["bounded"] = bounded;
  doc["reference_poincare"] = reference_poincare;
  return doc;
}

ConstantsRecord estimate_inequality_constants(int levels, int degree, int samples) {
  QMLOC_THROW_IF(levels < 0 || levels > 8, ErrorCode::ParameterOutOfRange, "levels must lie in [0, 8]");
  QMLOC_THROW_IF(samples < 1, ErrorCode::InvalidInput, "need at least one sample");
  ConstantsRecord rec;
  rec.degree = degree;
  Triangulation mesh = Triangulation::build({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
  const int sample_degree = degree + 1;
  const int n_coeffs = (sample_degree + 1) * (sample_degree + 2) / 2 - 1;
  const LineRule& line = gauss_legendre(sample_degree + 2);

  for (int level = 0; level <= levels; ++level) {
    if (level > 0) mesh = uniform_refine(mesh);
    const LagrangeSpace space = LagrangeSpace::build(mesh, degree, false);
    const QuadraturePlan plan = make_quadrature_plan(mesh, 2 * sample_degree);
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    ConstantsLevel cl;
    cl.level = level;
    cl.sigma = mesh.shape_parameter();
    cl.phi_scaled_min = cl.dual_scaled_min = 1e300;
    for (std::size_t ki = 0; ki < mesh.num_triangles(); ++ki) {
      const Id k = static_cast<Id>(ki);
      const double area = mesh.area(k);
      const double h = mesh.diameter(k);
      cl.h = std::max(cl.h, h);
      const Eigen::MatrixXd mass = element_mass(space, k);
      const Eigen::MatrixXd dual = element_dual_basis(space, k);
      for (Eigen::Index z = 0; z < mass.rows(); ++z) {
        const double phi = std::sqrt(mass(z, z) / area);
        const double psi = std::sqrt(dual(z, z) * area);
        cl.phi_scaled_min = std::min(cl.phi_scaled_min, phi);
        cl.phi_scaled_max = std::max(cl.phi_scaled_max, phi);
        cl.dual_scaled_min = std::min(cl.dual_scaled_min, psi);
        cl.dual_scaled_max = std::max(cl.dual_scaled_max, psi);
      }
      const auto corners = mesh.corners(k);
      const auto pts = plan.points(k);
      for (int s = 0; s < samples; ++s) {
        PolySample p{sample_degree, {}, mesh.barycenter(k), h};
        for (int c = 0; c < n_coeffs; ++c) p.c.push_back(dist(rng));
        double mean = 0.0, v2 = 0.0, g2 = 0.0;
        for (const auto& q : pts) mean += q.weight * p.value(q.x);
        mean /= area;
        for (const auto& q : pts) {
          const double v = p.value(q.x) - mean;
          v2 += q.weight * v * v;
          g2 += q.weight * norm_sq(p.gradient(q.x));
        }
        double b2 = 0.0;
        for (int e = 0; e < 3; ++e) {
          const Point2& a = corners[static_cast<std::size_t>(e)];
          const Point2& b = corners[static_cast<std::size_t>((e + 1) % 3)];
          const double len = distance(a, b);
          for (std::size_t i = 0; i < line.nodes.size(); ++i) {
            const double t = line.nodes[i];
            const double v = p.value((1.0 - t) * a + t * b) - mean;
            b2 += len * line.weights[i] * v * v;
          }
        }
        cl.trace_constant = std::max(cl.trace_constant, b2 / (v2 / h + h * g2));
        cl.poincare_constant = std::max(cl.poincare_constant, std::sqrt(v2) / (h * std::sqrt(g2)));
      }
    }
    rec.levels.push_back(cl);
  }

  std::vector<double> tr, po;
  for (const auto& l : rec.levels) tr.push_back(l.trace_constant), po.push_back(l.poincare_constant);
  rec.trace_spread = spread(tr);
  rec.poincare_spread = spread(po);
  rec.bounded = rec.trace_spread <= 10.0 && rec.poincare_spread <= 10.0;

  // v = x - 1/3 on the reference triangle: |v|^2 = 1/36, |grad v|^2 = 1/2.
  const Triangulation ref = Triangulation::build({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  const QuadraturePlan rp = make_quadrature_plan(ref, 2);
  const double v2 = integrate([](const Point2& x) { return (x.x - 1.0 / 3.0) * (x.x - 1.0 / 3.0); }, rp);
  const double g2 = ref.area(0);
  rec.reference_poincare = std::sqrt(v2) / (ref.diameter(0) * std::sqrt(g2));
  return rec;
}

}  // namespace qmloc
