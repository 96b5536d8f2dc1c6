// qmloc: command-line driver for the localization experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "qmloc/coefficient.hpp"
#include "qmloc/error.hpp"
#include "qmloc/fespace.hpp"
#include "qmloc/harness.hpp"
#include "qmloc/mesh_io.hpp"
#include "qmloc/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitSolver = 2;
constexpr int kExitNotQm = 3;

int exit_code_for(qmloc::ErrorCode code) {
  switch (code) {
    case qmloc::ErrorCode::SolverFailure:
    case qmloc::ErrorCode::QuadratureFailure:
    case qmloc::ErrorCode::SingularPointOnQuadratureNode:
      return kExitSolver;
    default:
      return kExitInvalid;
  }
}

qmloc::ReportFormat parse_format(const std::string& s) {
  if (s == "json") return qmloc::ReportFormat::Json;
  if (s == "csv") return qmloc::ReportFormat::Csv;
  return qmloc::ReportFormat::LociCsv;
}

struct Output {
  std::string format = "json";
  std::string path;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "loci-csv"}))
        ->capture_default_str();
    cmd->add_option("-o,--output", path, "Write to this file instead of stdout");
  }

  void emit(const std::vector<qmloc::LocalizationReport>& reports) const {
    if (path.empty()) {
      qmloc::emit_report(reports, parse_format(format), std::cout);
    } else {
      qmloc::emit_report(reports, parse_format(format), path);
    }
  }
};

int run_qm_check(const std::string& file, int degree) {
  const qmloc::MeshFile mf = qmloc::load_mesh(file);
  QMLOC_THROW_IF(!mf.coefficient, qmloc::ErrorCode::InvalidInput, "mesh file has no \"coefficient\" entry");
  const auto a = qmloc::Coefficient::attach(mf.mesh, *mf.coefficient);
  const auto space = qmloc::LagrangeSpace::build(mf.mesh, degree, false);
  const qmloc::QmReport report = qmloc::check_quasi_monotonicity(space, a);
  auto doc = report.to_json();
  doc["alpha"] = a.alpha();
  std::cout << doc.dump(2) << '\n';
  return report.quasi_monotone ? kExitOk : kExitNotQm;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localization of best-approximation errors for piecewise-constant diffusion"};
  app.require_subcommand(1);

  qmloc::HarnessOptions opt;
  int degree = 1;
  Output out;

  std::string mesh_file;
  auto* qm = app.add_subcommand("qm-check", "Classify the coefficient of a mesh file (exit 3 if not quasi-monotone)");
  qm->add_option("mesh", mesh_file, "Mesh JSON with vertices, triangles and coefficient")->required();
  qm->add_option("--ell", degree, "Polynomial degree of the node set")->check(CLI::Range(1, 4))->capture_default_str();

  std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  auto* hex = app.add_subcommand("hexagon", "Element, pair and star localization on the hexagon");
  hex->add_option("--eps", eps, "Comma-separated eps values")->delimiter(',')->capture_default_str();
  hex->add_option("--ell", degree, "Polynomial degree")->check(CLI::Range(1, 4))->capture_default_str();
  out.add_to(hex);

  std::vector<int> ns{2, 4, 8};
  auto* stars = app.add_subcommand("stars", "Star localization on the checkerboard");
  stars->add_option("--n", ns, "Comma-separated N values")->delimiter(',')->capture_default_str();
  stars->add_option("--ell", degree, "Polynomial degree")->check(CLI::Range(1, 4))->capture_default_str();
  out.add_to(stars);

  std::string pattern = "graded";
  std::vector<double> alphas{1.0, 1e-2, 1e-4, 1e-6};
  std::vector<double> betas{1e-4, 1.0, 1e4};
  std::vector<std::string> targets = qmloc::smooth_target_names();
  int refinements = opt.refinements;

  auto* alpha = app.add_subcommand("alpha", "Element localization across a coefficient-contrast sweep");
  alpha->add_option("--pattern", pattern, "Coefficient pattern")
      ->check(CLI::IsMember({"graded", "alternating"}))
      ->capture_default_str();
  alpha->add_option("--alphas", alphas, "Comma-separated alpha values")->delimiter(',')->capture_default_str();
  alpha->add_option("--targets", targets, "Comma-separated target names")->delimiter(',')->capture_default_str();
  alpha->add_option("--refinements", refinements, "Uniform refinements")->check(CLI::Range(0, 6))->capture_default_str();
  alpha->add_option("--ell", degree, "Polynomial degree")->check(CLI::Range(1, 4))->capture_default_str();
  out.add_to(alpha);

  std::vector<double> rd_alphas{1.0, 1e-4};
  auto* rd = app.add_subcommand("rd", "Diffusion-reaction localization across alpha and beta");
  rd->add_option("--pattern", pattern, "Coefficient pattern")
      ->check(CLI::IsMember({"graded", "alternating"}))
      ->capture_default_str();
  rd->add_option("--alphas", rd_alphas, "Comma-separated alpha values")->delimiter(',')->capture_default_str();
  rd->add_option("--betas", betas, "Comma-separated beta values")->delimiter(',')->capture_default_str();
  rd->add_option("--targets", targets, "Comma-separated target names")->delimiter(',')->capture_default_str();
  rd->add_option("--refinements", refinements, "Uniform refinements")->check(CLI::Range(0, 6))->capture_default_str();
  rd->add_option("--ell", degree, "Polynomial degree")->check(CLI::Range(1, 4))->capture_default_str();
  out.add_to(rd);

  int levels = 4;
  auto* constants = app.add_subcommand("constants", "Scaling, trace and Poincare constants on refined squares");
  constants->add_option("--levels", levels, "Refinement levels")->check(CLI::Range(0, 8))->capture_default_str();
  constants->add_option("--ell", degree, "Polynomial degree")->check(CLI::Range(1, 4))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    opt.quadrature = qmloc::quadrature_options_from_env();
    opt.degree = degree;
    opt.refinements = refinements;
    if (*qm) return run_qm_check(mesh_file, degree);
    if (*hex) out.emit(qmloc::run_hexagon_sweep(eps, opt));
    if (*stars) out.emit(qmloc::run_star_sweep(ns, opt));
    if (*alpha) out.emit(qmloc::run_alpha_robustness(pattern, alphas, targets, opt));
    if (*rd) out.emit(qmloc::run_reaction_diffusion(pattern, rd_alphas, betas, targets, opt));
    if (*constants) std::cout << qmloc::estimate_inequality_constants(levels, degree).to_json().dump(2) << '\n';
  } catch (const qmloc::Error& e) {
    std::cerr << "qmloc: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qmloc: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}
