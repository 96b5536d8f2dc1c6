#include "qmloc/mesh_io.hpp"

#include <cmath>
#include <fstream>

#include "qmloc/error.hpp"

namespace qmloc {

namespace {

double finite_number(const nlohmann::json& v, const char* what) {
  QMLOC_THROW_IF(!v.is_number(), ErrorCode::InvalidInput, std::string(what) + " must be a number");
  const double x = v.get<double>();
  QMLOC_THROW_IF(!std::isfinite(x), ErrorCode::InvalidInput, std::string(what) + " is not finite");
  return x;
}

}  // namespace

MeshFile mesh_from_json(const nlohmann::json& doc) {
  QMLOC_THROW_IF(!doc.is_object(), ErrorCode::InvalidInput, "mesh document must be an object");
  QMLOC_THROW_IF(!doc.contains("vertices") || !doc["vertices"].is_array(), ErrorCode::InvalidInput,
                 "missing 'vertices' array");
  QMLOC_THROW_IF(!doc.contains("triangles") || !doc["triangles"].is_array(), ErrorCode::InvalidInput,
                 "missing 'triangles' array");

  std::vector<Point2> vertices;
  for (const auto& v : doc["vertices"]) {
    QMLOC_THROW_IF(!v.is_array() || v.size() != 2, ErrorCode::InvalidInput, "vertex must be [x, y]");
    vertices.push_back({finite_number(v[0], "vertex coordinate"), finite_number(v[1], "vertex coordinate")});
  }
  std::vector<std::array<Id, 3>> triangles;
  for (const auto& t : doc["triangles"]) {
    QMLOC_THROW_IF(!t.is_array() || t.size() != 3, ErrorCode::InvalidInput, "triangle must be [i, j, k]");
    std::array<Id, 3> tri{};
    for (int i = 0; i < 3; ++i) {
      QMLOC_THROW_IF(!t[i].is_number_integer() || t[i].get<long long>() < 0, ErrorCode::InvalidInput,
                     "triangle vertex ids must be non-negative integers");
      tri[i] = static_cast<Id>(t[i].get<long long>());
    }
    triangles.push_back(tri);
  }

  MeshFile out{Triangulation::build(std::move(vertices), std::move(triangles)), std::nullopt};
  if (doc.contains("coefficient") && !doc["coefficient"].is_null()) {
    QMLOC_THROW_IF(!doc["coefficient"].is_array(), ErrorCode::InvalidInput, "'coefficient' must be an array");
    std::vector<double> values;
    for (const auto& a : doc["coefficient"]) values.push_back(finite_number(a, "coefficient value"));
    out.coefficient = std::move(values);
  }
  return out;
}

MeshFile load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  QMLOC_THROW_IF(!in, ErrorCode::IoFailure, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
  }
  return mesh_from_json(doc);
}

nlohmann::ordered_json mesh_to_json(const Triangulation& mesh, const std::vector<double>* coefficient) {
  nlohmann::ordered_json doc;
  auto& vs = doc["vertices"] = nlohmann::ordered_json::array();
  for (const auto& p : mesh.vertices()) vs.push_back({p.x, p.y});
  auto& ts = doc["triangles"] = nlohmann::ordered_json::array();
  for (const auto& t : mesh.triangles()) ts.push_back({t[0], t[1], t[2]});
  if (coefficient != nullptr) doc["coefficient"] = *coefficient;
  return doc;
}

void save_mesh(const std::filesystem::path& path, const Triangulation& mesh, const std::vector<double>* coefficient) {
  std::ofstream out(path);
  QMLOC_THROW_IF(!out, ErrorCode::IoFailure, "cannot write " + path.string());
  out << mesh_to_json(mesh, coefficient).dump(2) << '\n';
  QMLOC_THROW_IF(!out, ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace qmloc
