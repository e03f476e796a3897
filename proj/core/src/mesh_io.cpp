#include "fbms/mesh_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fbms {

namespace {

void write_obj(const TriMesh& mesh, std::ostream& out) {
    out << "# fbms surface mesh\n";
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices)
        out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    if (!mesh.on_sphere.empty()) {
        out << "# on_sphere:";
        for (size_t i = 0; i < mesh.on_sphere.size(); ++i)
            if (mesh.on_sphere[i]) out << " " << (i + 1);
        out << "\n";
    }
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

TriMesh read_obj(std::istream& in) {
    TriMesh mesh;
    std::string line;
    std::vector<int> flagged;
    while (std::getline(in, line)) {
        if (line.rfind("# on_sphere:", 0) == 0) {
            std::istringstream ss(line.substr(12));
            int idx;
            while (ss >> idx) flagged.push_back(idx - 1);
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 p;
            ss >> p.x() >> p.y() >> p.z();
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::array<int, 3> t{};
            for (int k = 0; k < 3; ++k) {
                std::string token;
                ss >> token;
                t[k] = std::stoi(token) - 1; // ignore /vt/vn suffixes
            }
            mesh.triangles.push_back(t);
        }
    }
    mesh.on_sphere.assign(mesh.vertices.size(), 0);
    for (int idx : flagged) {
        if (idx < 0 || idx >= mesh.vertex_count())
            throw std::runtime_error("on_sphere index out of range in OBJ");
        mesh.on_sphere[idx] = 1;
    }
    return mesh;
}

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("unexpected end of PLY payload");
    return value;
}

void write_ply(const TriMesh& mesh, std::ostream& out) {
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << mesh.vertex_count() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "property uchar on_sphere\n";
    out << "element face " << mesh.triangle_count() << "\n";
    out << "property list uchar int vertex_indices\n";
    out << "end_header\n";
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const auto& v = mesh.vertices[i];
        put(out, v.x());
        put(out, v.y());
        put(out, v.z());
        put(out, static_cast<std::uint8_t>(mesh.on_sphere.empty() ? 0 : mesh.on_sphere[i]));
    }
    for (const auto& t : mesh.triangles) {
        put(out, static_cast<std::uint8_t>(3));
        for (int k = 0; k < 3; ++k) put(out, static_cast<std::int32_t>(t[k]));
    }
}

TriMesh read_ply(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "ply") throw std::runtime_error("not a PLY stream");
    size_t nv = 0, nf = 0;
    bool has_flag = false;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt != "binary_little_endian")
                throw std::runtime_error("unsupported PLY format: " + fmt);
        } else if (tag == "element") {
            std::string kind;
            size_t count;
            ss >> kind >> count;
            if (kind == "vertex") nv = count;
            if (kind == "face") nf = count;
        } else if (tag == "property") {
            if (line.find("on_sphere") != std::string::npos) has_flag = true;
        } else if (tag == "end_header") {
            break;
        }
    }
    TriMesh mesh;
    mesh.vertices.resize(nv);
    mesh.on_sphere.assign(nv, 0);
    for (size_t i = 0; i < nv; ++i) {
        mesh.vertices[i].x() = get<double>(in);
        mesh.vertices[i].y() = get<double>(in);
        mesh.vertices[i].z() = get<double>(in);
        if (has_flag) mesh.on_sphere[i] = get<std::uint8_t>(in);
    }
    mesh.triangles.resize(nf);
    for (size_t i = 0; i < nf; ++i) {
        const auto n = get<std::uint8_t>(in);
        if (n != 3) throw std::runtime_error("PLY face is not a triangle");
        for (int k = 0; k < 3; ++k) mesh.triangles[i][k] = get<std::int32_t>(in);
    }
    return mesh;
}

} // namespace

void export_mesh(const TriMesh& mesh, MeshFormat format, std::ostream& out) {
    if (format == MeshFormat::Obj)
        write_obj(mesh, out);
    else
        write_ply(mesh, out);
}

TriMesh import_mesh(MeshFormat format, std::istream& in) {
    return format == MeshFormat::Obj ? read_obj(in) : read_ply(in);
}

std::string export_mesh_string(const TriMesh& mesh, MeshFormat format) {
    std::ostringstream ss(std::ios::binary);
    export_mesh(mesh, format, ss);
    return ss.str();
}

TriMesh import_mesh_string(MeshFormat format, const std::string& data) {
    std::istringstream ss(data, std::ios::binary);
    return import_mesh(format, ss);
}

namespace {
MeshFormat format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".obj") == 0) return MeshFormat::Obj;
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ply") == 0) return MeshFormat::Ply;
    throw std::invalid_argument("mesh path must end in .obj or .ply: " + path);
}
} // namespace

void save_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    export_mesh(mesh, format_from_path(path), out);
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return import_mesh(format_from_path(path), in);
}

} // namespace fbms
