#include "qmloc/report.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "qmloc/error.hpp"

namespace qmloc {

using ojson = nlohmann::ordered_json;

std::string_view to_string(LocusKind k) noexcept {
  switch (k) {
    case LocusKind::Element: return "element";
    case LocusKind::Pair: return "pair";
    case LocusKind::Star: return "star";
  }
  return "unknown";
}

namespace {

LocusKind kind_from_string(const std::string& s) {
  if (s == "element") return LocusKind::Element;
  if (s == "pair") return LocusKind::Pair;
  if (s == "star") return LocusKind::Star;
  throw Error(ErrorCode::InvalidInput, "unknown locus kind '" + s + "'");
}

constexpr LocusKind kAllKinds[] = {LocusKind::Element, LocusKind::Pair, LocusKind::Star};

std::string cell(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void write_metadata(const std::vector<LocalizationReport>& reports, std::ostream& out) {
  out << "# experiment=" << reports.front().experiment << '\n';
  for (const auto& [k, v] : reports.front().metadata.items()) out << "# " << k << '=' << cell(v) << '\n';
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return v != v ? "nan" : (v > 0 ? "inf" : "-inf");
  return ojson(v).dump();  // shortest representation that round-trips
}

double LocusSet::sum() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.error_sq;
  return s;
}

const LocusSet* LocalizationReport::find(LocusKind kind) const {
  for (const auto& l : loci) {
    if (l.kind == kind) return &l;
  }
  return nullptr;
}

std::optional<double> LocalizationReport::ratio(LocusKind kind) const {
  const LocusSet* l = find(kind);
  if (l == nullptr) return std::nullopt;
  const double s = l->sum();
  if (!(s > 0.0)) return std::nullopt;
  return global_error_sq / s;
}

ojson LocalizationReport::to_json() const {
  ojson doc;
  doc["experiment"] = experiment;
  doc["parameters"] = parameters;
  doc["metadata"] = metadata;
  doc["quasi_monotone"] = quasi_monotone;
  doc["global_error_sq"] = global_error_sq;
  auto& ls = doc["loci"] = ojson::array();
  for (const auto& l : loci) {
    ojson j;
    j["kind"] = to_string(l.kind);
    j["sum_error_sq"] = l.sum();
    const auto r = ratio(l.kind);
    j["ratio"] = r ? ojson(*r) : ojson();
    auto& es = j["entries"] = ojson::array();
    for (const auto& e : l.entries) {
      ojson x;
      x["id"] = e.id;
      x["error_sq"] = e.error_sq;
      if (e.candidate_sq) x["candidate_sq"] = *e.candidate_sq;
      if (e.vertex_type) x["vertex_type"] = *e.vertex_type;
      es.push_back(std::move(x));
    }
    ls.push_back(std::move(j));
  }
  doc["extra"] = extra;
  doc["diagnostics"] = diagnostics;
  return doc;
}

LocalizationReport LocalizationReport::from_json(const ojson& doc) {
  try {
    LocalizationReport r;
    r.experiment = doc.at("experiment").get<std::string>();
    r.parameters = doc.at("parameters");
    r.metadata = doc.at("metadata");
    r.quasi_monotone = doc.at("quasi_monotone").get<bool>();
    r.global_error_sq = doc.at("global_error_sq").get<double>();
    for (const auto& j : doc.at("loci")) {
      LocusSet l;
      l.kind = kind_from_string(j.at("kind").get<std::string>());
      for (const auto& x : j.at("entries")) {
        LocusEntry e;
        e.id = x.at("id").get<Id>();
        e.error_sq = x.at("error_sq").get<double>();
        if (x.contains("candidate_sq")) e.candidate_sq = x["candidate_sq"].get<double>();
        if (x.contains("vertex_type")) e.vertex_type = x["vertex_type"].get<int>();
        l.entries.push_back(e);
      }
      r.loci.push_back(std::move(l));
    }
    r.extra = doc.at("extra");
    r.diagnostics = doc.at("diagnostics");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed report: ") + e.what());
  }
}

void emit_report(const std::vector<LocalizationReport>& reports, ReportFormat format, std::ostream& out) {
  QMLOC_THROW_IF(reports.empty(), ErrorCode::InvalidInput, "no reports to emit");

  if (format == ReportFormat::Json) {
    ojson doc;
    doc["experiment"] = reports.front().experiment;
    doc["metadata"] = reports.front().metadata;
    auto& rs = doc["reports"] = ojson::array();
    for (const auto& r : reports) rs.push_back(r.to_json());
    out << doc.dump(2) << '\n';
    return;
  }

  write_metadata(reports, out);
  std::vector<std::string> params;
  for (const auto& [k, v] : reports.front().parameters.items()) params.push_back(k);

  if (format == ReportFormat::LociCsv) {
    for (const auto& p : params) out << p << ',';
    out << "kind,locus_id,error_sq,candidate_sq,vertex_type\n";
    for (const auto& r : reports) {
      for (const auto& l : r.loci) {
        for (const auto& e : l.entries) {
          for (const auto& p : params) out << cell(r.parameters.value(p, ojson())) << ',';
          out << to_string(l.kind) << ',' << e.id << ',' << format_number(e.error_sq) << ','
              << (e.candidate_sq ? format_number(*e.candidate_sq) : "") << ','
              << (e.vertex_type ? std::to_string(*e.vertex_type) : "") << '\n';
        }
      }
    }
    return;
  }

  std::vector<LocusKind> kinds;
  for (LocusKind k : kAllKinds) {
    for (const auto& r : reports) {
      if (r.find(k) != nullptr) {
        kinds.push_back(k);
        break;
      }
    }
  }
  std::vector<std::string> extras;
  for (const auto& [k, v] : reports.front().extra.items()) extras.push_back(k);

  for (const auto& p : params) out << p << ',';
  out << "global_sq";
  for (LocusKind k : kinds) out << ",sum_" << to_string(k) << "_sq";
  for (LocusKind k : kinds) out << ",ratio_" << to_string(k);
  for (const auto& x : extras) out << ',' << x;
  out << '\n';
  for (const auto& r : reports) {
    for (const auto& p : params) out << cell(r.parameters.value(p, ojson())) << ',';
    out << format_number(r.global_error_sq);
    for (LocusKind k : kinds) {
      const LocusSet* l = r.find(k);
      out << ',' << (l ? format_number(l->sum()) : "");
    }
    for (LocusKind k : kinds) {
      const auto q = r.ratio(k);
      out << ',' << (q ? format_number(*q) : "");
    }
    for (const auto& x : extras) out << ',' << cell(r.extra.value(x, ojson()));
    out << '\n';
  }
}

void emit_report(const std::vector<LocalizationReport>& reports, ReportFormat format, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  QMLOC_THROW_IF(!f, ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  emit_report(reports, format, f);
  f.flush();
  QMLOC_THROW_IF(!f, ErrorCode::IoFailure, "write to '" + path + "' failed");
}

}  // namespace qmloc
