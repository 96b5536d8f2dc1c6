#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmloc/fespace.hpp"
#include "qmloc/mesh.hpp"

namespace qmloc {

/// Piecewise-constant positive diffusion coefficient, one value per element.
class Coefficient {
 public:
  Coefficient() = default;

  /// Throws InvalidInput on a size mismatch or non-finite value and
  /// NonPositiveValue for values <= 0.
  static Coefficient attach(const Triangulation& mesh, std::vector<double> values);

  [[nodiscard]] double operator[](Id k) const { return values_.at(k); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  /// min a / max a, in (0, 1].
  [[nodiscard]] double alpha() const noexcept { return alpha_; }

  [[nodiscard]] Coefficient scaled(double factor) const;
  /// Transfers values to a mesh produced by uniform_refine.
  [[nodiscard]] Coefficient refined(const Triangulation& fine) const;

 private:
  std::vector<double> values_;
  double alpha_ = 1.0;
};

/// Chain K_0, ..., K_m of edge-adjacent elements inside one star with
/// non-decreasing coefficient. shared_edges[n] = K_n and K_{n+1} intersection.
struct MonotonePath {
  std::vector<Id> elements;
  std::vector<Id> shared_edges;
};

/// Pair (from, to) with a_from <= a_to in the star of `node` that no
/// monotone path connects.
struct QmWitness {
  Id node = kNoId;
  Id from = kNoId;
  Id to = kNoId;
};

struct NodeVerdict {
  Id node = kNoId;
  bool quasi_monotone = true;
};

struct QmReport {
  bool quasi_monotone = true;
  std::vector<NodeVerdict> nodes;
  std::vector<QmWitness> witnesses;

  [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/// Checks every node of `space` (vertex stars, edge pairs, single elements).
QmReport check_quasi_monotonicity(const LagrangeSpace& space, const Coefficient& a);
/// Checks the vertex stars of `mesh` only, i.e. the nodes of the degree-1 space.
QmReport check_quasi_monotonicity(const Triangulation& mesh, const Coefficient& a);

/// Shortest monotone path from `from` to `to` inside the given star; among
/// shortest paths the lexicographically smallest id sequence. Throws
/// LocusMismatch if either element is outside the star.
std::optional<MonotonePath> find_monotone_path(const Triangulation& mesh, const Coefficient& a,
                                               std::span<const Id> star, Id from, Id to);
/// Star of mesh vertex z.
std::optional<MonotonePath> find_monotone_path(const Triangulation& mesh, const Coefficient& a, Id vertex, Id from,
                                               Id to);

/// Element of maximal coefficient in the star of node z, smallest id on ties.
Id select_kmax(const LagrangeSpace& space, const Coefficient& a, Id node);
/// Same, for the star of a mesh vertex.
Id select_kmax(const Triangulation& mesh, const Coefficient& a, Id vertex);
/// Edge of K_max(z) containing node z, smallest id on ties; nullopt for
/// nodes interior to an element.
std::optional<Id> select_fz(const LagrangeSpace& space, const Coefficient& a, Id node);

/// Union of the selected monotone paths from K to K_max(z) over all nodes z
/// of K, ascending. Throws NoMonotonePath naming the first failing node.
std::vector<Id> build_omega_hat(const LagrangeSpace& space, const Coefficient& a, Id element);

}  // namespace qmloc
