#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmloc/coefficient.hpp"
#include "qmloc/fespace.hpp"
#include "qmloc/field.hpp"
#include "qmloc/quadrature.hpp"
#include "qmloc/sparse.hpp"

namespace qmloc {

/// Quadrature moments of a target u against the local basis of one element.
/// All errors below are exact algebraic functions of these numbers, so a
/// target is integrated once per element no matter how many loci use it.
struct ElementMoments {
  double grad_sq = 0.0;   // int |grad u|^2
  double value_sq = 0.0;  // int u^2
  double integral = 0.0;  // int u
  Eigen::VectorXd grad_load;   // int grad u . grad phi_i
  Eigen::VectorXd value_load;  // int u phi_i
  Eigen::MatrixXd stiffness;
  Eigen::MatrixXd mass;
  Eigen::VectorXd basis_integrals;
};

class TargetMoments {
 public:
  /// Throws PlanMismatch if `plan` was built on another mesh.
  static TargetMoments compute(const LagrangeSpace& space, const Field& u, const QuadraturePlan& plan);
  /// Moments of a discrete function given by nodal values (exact).
  static TargetMoments of_discrete(const LagrangeSpace& space, const Eigen::VectorXd& coefficients);

  [[nodiscard]] const LagrangeSpace& space() const noexcept { return *space_; }
  [[nodiscard]] const ElementMoments& operator[](Id k) const { return elements_.at(k); }
  [[nodiscard]] std::size_t size() const noexcept { return elements_.size(); }

 private:
  const LagrangeSpace* space_ = nullptr;
  std::vector<ElementMoments> elements_;
};

/// Local coefficients of an element-wise function in the nodal basis of K.
double element_energy_error(const ElementMoments& m, double a_k, const Eigen::VectorXd& local);
double element_l2_error(const ElementMoments& m, const Eigen::VectorXd& local);

/// a-weighted energy and L2 errors of u - v over `region`, v given by global
/// nodal values.
double energy_error(const TargetMoments& u, const Coefficient& a, std::span<const Id> region, const Eigen::VectorXd& v);
double energy_error(const TargetMoments& u, const Coefficient& a, const Eigen::VectorXd& v);
double l2_error(const TargetMoments& u, std::span<const Id> region, const Eigen::VectorXd& v);

struct ElementFit {
  double error_sq = 0.0;
  /// Best polynomial P_K in the local nodal basis of K.
  Eigen::VectorXd coefficients;
};

/// a_K inf over P in P_l(K) of |grad(u - P)|^2_K. With mean_match the
/// constant of P_K is fixed by int_K P_K = int_K u, otherwise by matching
/// the mean at the barycenter; error_sq does not depend on it.
ElementFit local_element_error(const TargetMoments& u, const Coefficient& a, Id k, bool mean_match = true);

enum class RegionBoundary { None, Dirichlet };

/// inf over V in S|region of |a^(1/2) grad(u - V)|^2_region. With
/// RegionBoundary::Dirichlet nodes on the domain boundary are held at zero.
double local_region_error(const TargetMoments& u, const Coefficient& a, std::span<const Id> region,
                          RegionBoundary boundary, const SolverOptions& options = {});

/// inf over V in S|region of |u - V|^2_region (no gradient term).
double local_region_l2_error(const TargetMoments& u, std::span<const Id> region, RegionBoundary boundary,
                             const SolverOptions& options = {});

enum class Gauge { Dirichlet, MeanZero };

struct RitzResult {
  double error_sq = 0.0;
  /// Global nodal values of the projection.
  Eigen::VectorXd coefficients;
  Gauge gauge = Gauge::MeanZero;
  SolveResult solve;
};

/// Energy Ritz projection onto the whole space. A Dirichlet-masked space
/// uses the Dirichlet gauge; otherwise one node is pinned and the constant
/// is then fixed so that int (u - Ru) = 0.
RitzResult global_best_error(const TargetMoments& u, const Coefficient& a, const SolverOptions& options = {});

/// Projection in the combined form (a grad ., grad .) + beta (., .).
RitzResult global_combined_error(const TargetMoments& u, const Coefficient& a, double beta,
                                 const SolverOptions& options = {});

/// L2 projection onto the space.
RitzResult global_l2_error(const TargetMoments& u, const SolverOptions& options = {});

struct IndexedError {
  Id id = kNoId;
  double error_sq = 0.0;
};

struct ReactionDiffusionErrors {
  double beta = 0.0;
  double combined_global_sq = 0.0;
  double gradient_global_sq = 0.0;
  double l2_global_sq = 0.0;
  std::vector<IndexedError> element_gradient;  // per element
  std::vector<IndexedError> pair_l2;           // per interior edge

  [[nodiscard]] double localized_sum() const;
};

ReactionDiffusionErrors reaction_diffusion_errors(const TargetMoments& u, const Coefficient& a, double beta,
                                                  const SolverOptions& options = {});

}  // namespace qmloc
