#pragma once

#include <iosfwd>
#include <string>

#include "fbms/mesh.hpp"

namespace fbms {

enum class MeshFormat { Obj, Ply };

// OBJ: text, 64-bit float precision, boundary flags as a comment-line list of
// 1-based vertex indices. PLY: binary little-endian, vertex property
// "on_sphere" (uchar).
void export_mesh(const TriMesh& mesh, MeshFormat format, std::ostream& out);
TriMesh import_mesh(MeshFormat format, std::istream& in);

std::string export_mesh_string(const TriMesh& mesh, MeshFormat format);
TriMesh import_mesh_string(MeshFormat format, const std::string& data);

void save_mesh(const TriMesh& mesh, const std::string& path); // format from extension
TriMesh load_mesh(const std::string& path);

} // namespace fbms
