#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmloc/mesh.hpp"

namespace qmloc {

/// Mesh file contents: { "vertices": [[x,y],...], "triangles": [[i,j,k],...],
/// "coefficient": [a_0,...] }, the last entry optional.
struct MeshFile {
  Triangulation mesh;
  std::optional<std::vector<double>> coefficient;
};

MeshFile mesh_from_json(const nlohmann::json& doc);
MeshFile load_mesh(const std::filesystem::path& path);

nlohmann::ordered_json mesh_to_json(const Triangulation& mesh, const std::vector<double>* coefficient = nullptr);
void save_mesh(const std::filesystem::path& path, const Triangulation& mesh,
               const std::vector<double>* coefficient = nullptr);

}  // namespace qmloc
