#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmloc/quadrature.hpp"
#include "qmloc/report.hpp"
#include "qmloc/sparse.hpp"
#include "qmloc/targets.hpp"

namespace qmloc {

struct HarnessOptions {
  int degree = 1;
  /// Uniform refinements applied to the four-triangle patterns.
  int refinements = 3;
  /// Exactness of the plain element rule used for smooth targets.
  int smooth_exactness = 12;
  QuadratureOptions quadrature;
  SolverOptions solver;
};

/// Quadrature options with rtol taken from QMLOC_RTOL when set. Throws
/// InvalidInput on a malformed or non-positive value.
QuadratureOptions quadrature_options_from_env();

/// Default options with the environment override applied.
HarnessOptions default_harness_options();

/// Hexagon target u_eps on the six-triangle hexagon, Dirichlet space: global
/// error against element, pair (interior edge) and star (interior vertex)
/// localizations, one report per eps.
std::vector<LocalizationReport> run_hexagon_sweep(const std::vector<double>& eps, const HarnessOptions& opt);

/// Checkerboard target U_N, Dirichlet space: global error against stars of
/// all interior vertices; each star entry carries its patch type (1 macro
/// center, 2 macro edge midpoint, 3 macro corner) and, for degree 1, the
/// error of the explicit comparison function.
std::vector<LocalizationReport> run_star_sweep(const std::vector<int>& n, const HarnessOptions& opt);

/// Named coefficient pattern for sweep value alpha: "graded" (layered
/// quasi-monotone family) or "alternating" (checkerboard of 1 and alpha),
/// refined opt.refinements times.
CoefficientMesh make_pattern(const std::string& pattern, double alpha, int refinements);

/// Mean-zero global error against element localization, plus the near-best
/// ratio of Pi. Throws RefusesNonQM if the pattern is not quasi-monotone.
std::vector<LocalizationReport> run_alpha_robustness(const std::string& pattern, const std::vector<double>& alphas,
                                                     const std::vector<std::string>& targets,
                                                     const HarnessOptions& opt);

/// Combined diffusion-reaction error against beta * (pair L2 sum) + (element
/// gradient sum). Throws RefusesNonQM.
std::vector<LocalizationReport> run_reaction_diffusion(const std::string& pattern, const std::vector<double>& alphas,
                                                       const std::vector<double>& betas,
                                                       const std::vector<std::string>& targets,
                                                       const HarnessOptions& opt);

/// max / min of a list of positive values.
double spread(const std::vector<double>& values);

struct ConstantsLevel {
  int level = 0;
  double h = 0.0;
  double sigma = 0.0;
  double phi_scaled_min = 0.0;   // |phi_z|_K / |K|^(1/2)
  double phi_scaled_max = 0.0;
  double dual_scaled_min = 0.0;  // |psi_z^K|_K |K|^(1/2)
  double dual_scaled_max = 0.0;
  double trace_constant = 0.0;     // |v|^2_dK / (|v|^2_K / h + h |grad v|^2_K)
  double poincare_constant = 0.0;  // |v - mean v|_K / (h |grad v|_K)
};

struct ConstantsRecord {
  int degree = 1;
  std::vector<ConstantsLevel> levels;
  double trace_spread = 0.0;
  double poincare_spread = 0.0;
  bool bounded = false;  // both spreads <= 10
  double reference_poincare = 0.0;  // v = x - 1/3 on the reference triangle

  [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/// Scaling, trace and Poincare constants over uniform refinements of the
/// two-triangle unit square, measured on fixed-seed polynomial samples.
ConstantsRecord estimate_inequality_constants(int levels, int degree = 1, int samples = 20);

}  // namespace qmloc
