#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmloc/geometry.hpp"

namespace qmloc {

enum class LocusKind { Element, Pair, Star };
std::string_view to_string(LocusKind k) noexcept;

struct LocusEntry {
  Id id = kNoId;
  double error_sq = 0.0;
  /// Stars only: error of the explicit comparison function and patch type.
  std::optional<double> candidate_sq;
  std::optional<int> vertex_type;
};

struct LocusSet {
  LocusKind kind = LocusKind::Element;
  std::vector<LocusEntry> entries;

  [[nodiscard]] double sum() const;
};

/// One sweep point: global best error against localized errors.
struct LocalizationReport {
  std::string experiment;
  /// Sweep parameters in column order (e.g. eps, or alpha and target).
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  /// Run settings shared by the sweep (degree, tolerances, gauge, ...).
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  double global_error_sq = 0.0;
  bool quasi_monotone = false;
  std::vector<LocusSet> loci;
  /// Additional scalar results, emitted as extra CSV columns.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  /// Checks and provenance that appear in JSON output only.
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();

  [[nodiscard]] const LocusSet* find(LocusKind kind) const;
  /// global_error_sq / sum over the locus set; nullopt if the sum vanishes.
  [[nodiscard]] std::optional<double> ratio(LocusKind kind) const;

  [[nodiscard]] nlohmann::ordered_json to_json() const;
  static LocalizationReport from_json(const nlohmann::ordered_json& doc);
};

enum class ReportFormat { Json, Csv, LociCsv };

/// Json: {"experiment", "metadata", "reports": [...]}. Csv: one summary row
/// per report. LociCsv: one row per (report, locus). Both CSV forms start
/// with "# key=value" metadata lines. Throws InvalidInput on an empty list.
void emit_report(const std::vector<LocalizationReport>& reports, ReportFormat format, std::ostream& out);
/// Throws IoFailure if the file cannot be written.
void emit_report(const std::vector<LocalizationReport>& reports, ReportFormat format, const std::string& path);

/// Shortest round-trip representation used in every CSV cell.
std::string format_number(double v);

}  // namespace qmloc
