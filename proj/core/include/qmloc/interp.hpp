#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qmloc/bestapprox.hpp"
#include "qmloc/coefficient.hpp"
#include "qmloc/fespace.hpp"
#include "qmloc/field.hpp"

namespace qmloc {

enum class NodeSource { InteriorBestFit, FaceDual, ElementDual, BoundaryZero };
std::string_view to_string(NodeSource s) noexcept;

struct InterpolantResult {
  Eigen::VectorXd coefficients;
  std::vector<NodeSource> source;  // per node
  /// Element K_max(z) per node (kNoId where unused).
  std::vector<Id> kmax;
  /// Edge F_z per node (kNoId where unused).
  std::vector<Id> face;
};

/// Operator Pi: element-interior nodes take the value of the mean-matched
/// best fit P_K; skeleton nodes take the face-dual moment on F_z, an edge of
/// K_max(z). Boundary nodes of a Dirichlet-masked space are set to zero.
/// `edge_points` Gauss points per edge are used for the face moments.
InterpolantResult quasi_interpolate(const Field& u, const TargetMoments& moments, const Coefficient& a,
                                    int edge_points = 0);

/// Operator Pi~: node values from the element-dual moment on K_max(z).
InterpolantResult l2_quasi_interpolate(const TargetMoments& moments, const Coefficient& a);

enum class OperatorKind { Pi, PiTilde };

struct OperatorReport {
  OperatorKind kind = OperatorKind::Pi;
  std::vector<double> element_error_sq;  // |u - Iu|^2_{a,K}
  std::vector<double> patch_local_sq;    // sum over K' in omega_K of local element errors
  double error_sq = 0.0;
  double patch_local_sum = 0.0;
  double near_best_ratio = 0.0;  // error_sq / patch_local_sum, 0 when both vanish
  double l2_ratio = 0.0;         // |Iu| / |u|
  std::optional<double> energy_ratio;  // |a^(1/2) grad Iu| / |a^(1/2) grad u|
  std::vector<std::size_t> omega_hat_sizes;

  [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/// With energy_diagnostic set, builds omega-hat for every element first and
/// propagates NoMonotonePath when the coefficient is not quasi-monotone.
OperatorReport operator_report(const TargetMoments& moments, const Coefficient& a, const InterpolantResult& iu,
                               OperatorKind kind, bool energy_diagnostic = false);

}  // namespace qmloc
