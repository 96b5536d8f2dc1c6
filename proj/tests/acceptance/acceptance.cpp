// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qmloc/bestapprox.hpp"
#include "qmloc/coefficient.hpp"
#include "qmloc/error.hpp"
#include "qmloc/harness.hpp"
#include "qmloc/interp.hpp"
#include "qmloc/quadrature.hpp"
#include "qmloc/report.hpp"
#include "qmloc/targets.hpp"
#include "test_support.hpp"

using namespace qmloc;
namespace qt = qmloc::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED: " << what << ';';
    }
  }
};

std::string num(double v) { return format_number(v); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

const std::vector<double> kEps{0.1, 0.05, 0.025, 0.0125};
const std::vector<double> kAlphas{1.0, 1e-2, 1e-4, 1e-6};

const std::vector<LocalizationReport>& hexagon_sweep() {
  static const std::vector<LocalizationReport> r = run_hexagon_sweep(kEps, default_harness_options());
  return r;
}

double diag(const LocalizationReport& r, const char* key) { return r.diagnostics.at(key).get<double>(); }

// 1. Classifier verdicts and agreement with exhaustive path enumeration.
void qm_classifier(Outcome& o) {
  std::size_t stars = 0;
  auto agree = [&](const CoefficientMesh& cm, const std::string& name) {
    const QmReport rep = check_quasi_monotonicity(cm.mesh, cm.a);
    const auto values = qt::values_of(cm.a);
    bool all = true;
    for (Id z = 0; z < cm.mesh.num_vertices(); ++z) {
      o.require(cm.mesh.vertex_star(z).size() <= 12, name + " star larger than 12");
      const auto expected = qt::brute_force_unreachable(cm.mesh, values, z);
      std::set<std::pair<Id, Id>> got;
      for (const auto& w : rep.witnesses) {
        if (w.node == z) got.insert({w.from, w.to});
      }
      o.require(got == expected, name + " witnesses differ from enumeration at vertex " + std::to_string(z));
      all = all && expected.empty();
      ++stars;
    }
    o.require(rep.quasi_monotone == all, name + " overall verdict differs from enumeration");
    return rep;
  };
  for (double m : {2.0, 4.0, 8.0}) {
    o.require(agree(graded_quadrants(m), "graded").quasi_monotone, "graded M=" + num(m) + " not QM");
    agree(refine(graded_quadrants(m), 1), "graded refined");
  }
  for (double m : {10.0, 100.0}) {
    o.require(!agree(alternating_quadrants(m), "alternating").quasi_monotone, "alternating M=" + num(m) + " QM");
    agree(refine(alternating_quadrants(m), 1), "alternating refined");
  }
  const Triangulation grid = uniform_refine(qt::jittered_grid());
  o.require(agree({grid, Coefficient::attach(grid, std::vector<double>(grid.num_triangles(), 2.0))}, "constant")
                .quasi_monotone,
            "constant coefficient not QM");
  const QmReport hex = agree(hexagon_mesh(0.1), "hexagon");
  o.require(!hex.quasi_monotone && !hex.witnesses.empty(), "hexagon has no witness");
  const QmReport cb = agree(checkerboard_mesh(3), "checkerboard");
  o.require(!cb.quasi_monotone && !cb.witnesses.empty(), "checkerboard has no witness");
  if (!hex.witnesses.empty() && !cb.witnesses.empty()) {
    const auto& h = hex.witnesses.front();
    const auto& c = cb.witnesses.front();
    o.detail << " hexagon witness node " << h.node << " (" << h.from << "," << h.to << "); checkerboard witness node "
             << c.node << " (" << c.from << "," << c.to << "); " << stars << " stars enumerated;";
  }
}

// 2. Singular quadrature against closed forms.
void quadrature_oracle(Outcome& o) {
  for (double eps : {0.1, 0.01}) {
    const CoefficientMesh h = hexagon_mesh(eps);
    const HexagonTarget u(eps);
    const QuadraturePlan plan = make_quadrature_plan(h.mesh, u, 4, default_harness_options().quadrature);
    const HexagonEnergyReference ref = analytic_energy_reference(eps);
    const double ball = integrate(
        [&](const Point2& x) {
          const double r = norm(x);
          if (r >= eps) return 0.0;
          const double d = u.rho_prime(r);
          return d * d;
        },
        plan);
    const std::array<Id, 2> k23{1, 2};
    const double radial = 2.0 / kPi * integrate(
                                          [&](const Point2& x) {
                                            const double r2 = norm_sq(x);
                                            const double rho = u.rho(std::sqrt(r2));
                                            return rho * rho / r2;
                                          },
                                          k23, plan);
    const double e1 = rel(ball, kPi * eps * (1 - eps) * (1 - eps));
    const double e2 = rel(radial, ref.rho_sq_over_r);
    o.require(e1 <= 1e-6, "ball energy eps=" + num(eps));
    o.require(e2 <= 1e-8, "rho^2/r eps=" + num(eps));
    o.require(radial <= ref.rho_sq_over_r_bound, "rho^2/r bound eps=" + num(eps));
    o.detail << " eps=" << num(eps) << ": ball rel " << num(e1) << ", rho^2/r rel " << num(e2) << ';';
  }
}

// 3. Element and face dual bases.
void dual_bases(Outcome& o) {
  const Triangulation m = qt::jittered_grid();
  std::mt19937_64 rng(3);
  double worst = 0.0, worst_norm = 0.0;
  for (int l = 1; l <= 3; ++l) {
    const LagrangeSpace s = LagrangeSpace::build(m, l, false);
    const QuadraturePlan plan = make_quadrature_plan(m, 2 * l);
    const LineRule& g = gauss_legendre(l + 2);
    for (int trial = 0; trial < 100; ++trial) {
      const qt::RandomPolynomial p(l, rng);
      const Id k = static_cast<Id>(trial % m.num_triangles());
      Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.local_size()));
      std::vector<double> v(s.local_size());
      for (const QuadPoint& q : plan.points(k)) {
        eval_basis_unchecked(s, k, q.x, v, {});
        for (std::size_t i = 0; i < v.size(); ++i) load[static_cast<Eigen::Index>(i)] += q.weight * p.value(q.x) * v[i];
      }
      const Eigen::VectorXd em = element_dual_basis(s, k) * load;
      const auto nodes = s.element_nodes(k);
      for (std::size_t z = 0; z < nodes.size(); ++z) {
        worst = std::max(worst, std::abs(em[static_cast<Eigen::Index>(z)] - p.value(s.node(nodes[z]).x)));
      }

      const Id e = static_cast<Id>(trial % m.num_edges());
      const auto& ev = m.edge(e).vertices;
      const Point2 a = m.vertex(ev[0]), b = m.vertex(ev[1]);
      Eigen::VectorXd fl = Eigen::VectorXd::Zero(l + 1);
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double t = g.nodes[q];
        for (int j = 0; j <= l; ++j) {
          fl[j] += distance(a, b) * g.weights[q] * p.value((1 - t) * a + t * b) * eval_edge_basis(l, j, t);
        }
      }
      const Eigen::VectorXd fm = face_dual_basis(s, e) * fl;
      const auto on_face = s.edge_nodes(e);
      for (std::size_t z = 0; z < on_face.size(); ++z) {
        worst = std::max(worst, std::abs(fm[static_cast<Eigen::Index>(z)] - p.value(s.node(on_face[z]).x)));
      }
    }
  }
  const LagrangeSpace s1 = LagrangeSpace::build(m, 1, false);
  for (Id k = 0; k < m.num_triangles(); ++k) {
    const Eigen::MatrixXd d = element_dual_basis(s1, k);
    const Eigen::MatrixXd mass = element_mass(s1, k);
    for (int z = 0; z < 3; ++z) {
      const double n2 = d.row(z) * mass * d.row(z).transpose();
      worst_norm = std::max(worst_norm, rel(n2, 9.0 / m.area(k)));
    }
  }
  o.require(worst <= 1e-12, "moment reproduction");
  o.require(worst_norm <= 1e-12, "|psi|^2 = 9/|K|");
  o.detail << " max nodal deviation " << num(worst) << ", max |psi|^2 rel " << num(worst_norm) << ';';
}

// 4. Local and global best errors against the dense solver.
void best_error_oracle(Outcome& o) {
  const Triangulation ref = qt::reference_triangle();
  const LagrangeSpace s0 = LagrangeSpace::build(ref, 1, false);
  const FunctionField x2([](const Point2& x) { return x.x * x.x; }, [](const Point2& x) { return Vec2{2 * x.x, 0}; });
  const double e0 =
      local_element_error(TargetMoments::compute(s0, x2, make_quadrature_plan(ref, 4)), Coefficient::attach(ref, {1.0}), 0)
          .error_sq;
  o.require(std::abs(e0 - 1.0 / 9.0) <= 1e-10, "x^2 local error");

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.05, 3.0);
  std::vector<std::pair<std::string, Triangulation>> meshes;
  meshes.emplace_back("square", qt::unit_square());
  meshes.emplace_back("jittered", qt::jittered_grid());
  meshes.emplace_back("hexagon", hexagon_mesh(0.2).mesh);
  meshes.emplace_back("quadrants", graded_quadrants(4.0).mesh);
  double worst = 0.0;
  int solves = 0;
  for (const auto& [name, mesh] : meshes) {
    std::vector<double> v(mesh.num_triangles());
    for (auto& x : v) x = d(rng);
    const Coefficient a = Coefficient::attach(mesh, v);
    for (int l = 1; l <= 2; ++l) {
      for (bool dirichlet : {false, true}) {
        const LagrangeSpace s = LagrangeSpace::build(mesh, l, dirichlet);
        const qt::RandomPolynomial p(l + 2, rng);
        const auto f = p.field();
        const TargetMoments mu = TargetMoments::compute(s, f, make_quadrature_plan(mesh, f, 4 * l + 4));
        auto oracle = [&](double beta, const std::vector<Id>& region) {
          return qt::DenseOracle{l, dirichlet, beta}.solve(
              mesh, v, region, [&](const Point2& x) { return p.value(x); }, [&](const Point2& x) { return p.gradient(x); });
        };
        auto track = [&](double got, double want) {
          worst = std::max(worst, rel(got, want));
          ++solves;
        };
        const auto all = qt::all_elements(mesh);
        track(global_best_error(mu, a).error_sq, oracle(0.0, all));
        track(global_combined_error(mu, a, 2.0).error_sq, oracle(2.0, all));
        for (Id z = 0; z < mesh.num_vertices(); ++z) {
          const auto star = mesh.vertex_star(z);
          const std::vector<Id> region(star.begin(), star.end());
          track(local_region_error(mu, a, region, dirichlet ? RegionBoundary::Dirichlet : RegionBoundary::None),
                oracle(0.0, region));
        }
        // Element fits carry no boundary condition.
        if (!dirichlet) {
          for (Id k : all) track(local_element_error(mu, a, k).error_sq, oracle(0.0, {k}));
        }
      }
    }
  }
  o.require(worst <= 1e-8, "dense oracle agreement");
  o.detail << " x^2 error " << num(e0) << "; " << solves << " Ritz energies, max rel deviation " << num(worst) << ';';
}

// 5. The Ritz projection of u_eps vanishes.
void zero_ritz(Outcome& o) {
  for (const auto& r : hexagon_sweep()) {
    const double eps = r.parameters.at("eps").get<double>();
    const double coeff = diag(r, "max_abs_ritz_coefficient");
    const double e = rel(r.global_error_sq, diag(r, "target_energy_sq"));
    o.require(coeff <= 1e-8, "Ritz coefficient eps=" + num(eps));
    o.require(e <= 1e-6, "global error vs energy eps=" + num(eps));
    o.detail << " eps=" << num(eps) << ": max|c| " << num(coeff) << ", rel " << num(e) << ';';
  }
}

// 6. Element and pair localization degrade as eps shrinks.
void element_pair_non_robust(Outcome& o) {
  const auto& sweep = hexagon_sweep();
  std::vector<double> global;
  for (const auto& r : sweep) global.push_back(r.global_error_sq);
  const double variation = spread(global) - 1.0;
  o.require(variation < 0.2, "global variation " + num(variation));
  o.detail << " global variation " << num(variation) << ';';
  for (LocusKind kind : {LocusKind::Element, LocusKind::Pair}) {
    o.detail << ' ' << to_string(kind) << " growth";
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      const double g = *sweep[i].ratio(kind) / *sweep[i - 1].ratio(kind);
      o.require(g >= 1.4, std::string(to_string(kind)) + " growth " + num(g));
      o.detail << ' ' << num(g);
    }
    o.detail << ';';
  }
}

// 7. Star localization degrades with N.
void star_non_robust(Outcome& o) {
  const auto sweep = run_star_sweep({2, 4, 8}, default_harness_options());
  std::vector<double> global;
  bool candidates = true;
  for (const auto& r : sweep) {
    global.push_back(r.global_error_sq);
    candidates = candidates && r.diagnostics.at("candidates_bound_minima").get<bool>();
  }
  const double variation = spread(global) - 1.0;
  const double reduction = sweep.back().find(LocusKind::Star)->sum() / sweep.front().find(LocusKind::Star)->sum();
  o.require(variation < 0.2, "global variation");
  o.require(reduction <= 0.5, "star sum reduction");
  o.require(candidates, "explicit candidates below minima");
  o.detail << " global variation " << num(variation) << ", star sum N=8 / N=2 " << num(reduction)
           << ", candidates bound minima " << (candidates ? "yes" : "no") << ';';
}

// 8. Localization and near-best constants stay flat in alpha under quasi-monotonicity.
void qm_robust(Outcome& o) {
  const auto reports = run_alpha_robustness("graded", kAlphas, smooth_target_names(), default_harness_options());
  std::map<std::string, std::vector<double>> ratio, near;
  for (const auto& r : reports) {
    const std::string t = r.parameters.at("target").get<std::string>();
    ratio[t].push_back(*r.ratio(LocusKind::Element));
    near[t].push_back(r.extra.at("near_best_ratio").get<double>());
  }
  for (const auto& [t, v] : ratio) {
    const double sr = spread(v), sn = spread(near[t]);
    o.require(sr <= 2.0, "localization spread " + t);
    o.require(sn <= 2.0, "near-best spread " + t);
    o.detail << ' ' << t << ": localization spread " << num(sr) << ", near-best spread " << num(sn) << ';';
  }
}

// 9. Projection identities, L2 stability of Pi~, refusal on non-QM meshes.
void operator_identities(Outcome& o) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0), pos(0.1, 10.0);
  const Triangulation m = qt::jittered_grid();
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int l = 1 + trial % 3;
    const LagrangeSpace s = LagrangeSpace::build(m, l, false);
    std::vector<double> av(m.num_triangles());
    for (auto& x : av) x = pos(rng);
    const Coefficient a = Coefficient::attach(m, av);
    // Random nodal values, evaluated through the nodal basis.
    Eigen::VectorXd c(static_cast<Eigen::Index>(s.num_nodes()));
    for (auto& x : c) x = d(rng);
    struct Discrete final : Field {
      const LagrangeSpace* s;
      const Eigen::VectorXd* c;
      double value(const Point2& x) const override {
        for (Id k = 0; k < s->mesh().num_triangles(); ++k) {
          const auto q = s->mesh().corners(k);
          const double det = cross(q[1] - q[0], q[2] - q[0]);
          const double l1 = cross(x - q[0], q[2] - q[0]) / det, l2 = cross(q[1] - q[0], x - q[0]) / det;
          if (l1 < -1e-12 || l2 < -1e-12 || l1 + l2 > 1 + 1e-12) continue;
          const BasisValues b = eval_basis(*s, k, x);
          const auto nodes = s->element_nodes(k);
          double v = 0.0;
          for (std::size_t i = 0; i < nodes.size(); ++i) v += (*c)[nodes[i]] * b.values[i];
          return v;
        }
        return 0.0;
      }
      Vec2 gradient(const Point2&) const override { return {}; }
    } f;
    f.s = &s;
    f.c = &c;
    const TargetMoments mu = TargetMoments::of_discrete(s, c);
    worst = std::max(worst, (quasi_interpolate(f, mu, a).coefficients - c).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, (l2_quasi_interpolate(mu, a).coefficients - c).lpNorm<Eigen::Infinity>());
  }
  o.require(worst <= 1e-10, "projection identity");

  const HarnessOptions opt = default_harness_options();
  std::vector<double> ratios;
  for (double alpha : kAlphas) {
    const CoefficientMesh cm = make_pattern("alternating", alpha, opt.refinements);
    const LagrangeSpace s = LagrangeSpace::build(cm.mesh, 1, false);
    const auto u = smooth_target("sin");
    const TargetMoments mu = TargetMoments::compute(s, *u, make_quadrature_plan(cm.mesh, opt.smooth_exactness));
    ratios.push_back(operator_report(mu, cm.a, l2_quasi_interpolate(mu, cm.a), OperatorKind::PiTilde).l2_ratio);
  }
  const double sp = spread(ratios);
  o.require(sp <= 2.0, "L2 ratio spread");

  const CoefficientMesh h = hexagon_mesh(0.1);
  const HexagonTarget u(0.1);
  const LagrangeSpace s = LagrangeSpace::build(h.mesh, 1, true);
  const TargetMoments mu = TargetMoments::compute(s, u, make_quadrature_plan(h.mesh, u, 4, opt.quadrature));
  bool refused = false;
  try {
    (void)operator_report(mu, h.a, l2_quasi_interpolate(mu, h.a), OperatorKind::PiTilde, true);
  } catch (const Error& e) {
    refused = e.code() == ErrorCode::NoMonotonePath;
  }
  o.require(refused, "energy diagnostic accepted the hexagon");
  o.detail << " max nodal deviation " << num(worst) << "; Pi~ L2 ratio spread on alternating " << num(sp)
           << "; hexagon energy diagnostic " << (refused ? "NoMonotonePath" : "not refused") << ';';
}

// 10. Diffusion-reaction equivalence and splitting bound.
void reaction_diffusion(Outcome& o) {
  const auto reports =
      run_reaction_diffusion("graded", {1.0, 1e-4}, {1e-4, 1.0, 1e4}, smooth_target_names(), default_harness_options());
  std::map<std::string, std::vector<double>> eq;
  double min_split = 1e300;
  for (const auto& r : reports) {
    eq[r.parameters.at("target").get<std::string>()].push_back(r.extra.at("equivalence_ratio").get<double>());
    min_split = std::min(min_split, r.extra.at("splitting_ratio").get<double>());
  }
  for (const auto& [t, v] : eq) {
    const double sp = spread(v);
    o.require(sp <= 4.0, "equivalence spread " + t);
    o.detail << ' ' << t << ": equivalence spread " << num(sp) << ';';
  }
  o.require(min_split >= 1.0 - 1e-12, "splitting bound");
  o.detail << " min splitting ratio " << num(min_split) << ';';
}

// 11. Identical runs emit identical bytes.
void determinism(Outcome& o) {
  const HarnessOptions opt = default_harness_options();
  auto render = [&] {
    std::ostringstream out;
    const std::vector<std::vector<LocalizationReport>> runs{
        run_hexagon_sweep({0.1, 0.05}, opt), run_star_sweep({2}, opt),
        run_alpha_robustness("graded", {1.0, 1e-4}, {"sin"}, opt),
        run_reaction_diffusion("graded", {1e-2}, {1.0}, {"exp"}, opt)};
    for (const auto& r : runs) {
      emit_report(r, ReportFormat::Json, out);
      emit_report(r, ReportFormat::Csv, out);
      emit_report(r, ReportFormat::LociCsv, out);
    }
    return out.str();
  };
  const std::string a = render(), b = render();
  o.require(a == b, "outputs differ");
  o.detail << ' ' << a.size() << " bytes compared;";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"QM classifier", qm_classifier},
      {"Singular quadrature", quadrature_oracle},
      {"Dual bases", dual_bases},
      {"Best-error oracle", best_error_oracle},
      {"Zero Ritz projection on the hexagon", zero_ritz},
      {"Element/pair non-robustness", element_pair_non_robust},
      {"Star non-robustness", star_non_robust},
      {"Robustness under quasi-monotonicity", qm_robust},
      {"Operator identities", operator_identities},
      {"Reaction-diffusion equivalence", reaction_diffusion},
      {"Determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what() << ';';
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %zu %s:%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
