#include "fbms/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace fbms {

namespace {

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

EdgeTable build_edge_table(const TriMesh& mesh) {
    EdgeTable table;
    std::unordered_map<std::uint64_t, int> index;
    index.reserve(mesh.triangles.size() * 2);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            const int a = tri[e], b = tri[(e + 1) % 3];
            const std::uint64_t key = edge_key(a, b);
            auto [it, inserted] = index.try_emplace(key, static_cast<int>(table.edges.size()));
            if (inserted) {
                table.edges.push_back({std::min(a, b), std::max(a, b), {t, -1}, 1});
            } else {
                EdgeTable::Edge& ed = table.edges[it->second];
                if (ed.count < 2) ed.tri[ed.count] = t;
                ++ed.count;
                if (ed.count > 2 && table.manifold) {
                    table.manifold = false;
                    table.nonmanifold_message =
                        "non-manifold edge (" + std::to_string(ed.v0) + "," +
                        std::to_string(ed.v1) + ") with " + std::to_string(ed.count) +
                        " incident triangles";
                }
            }
        }
    }
    return table;
}

std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh) {
    EdgeTable table = build_edge_table(mesh);
    if (!table.manifold) throw std::runtime_error(table.nonmanifold_message);
    // Directed boundary edges follow the winding of their unique triangle.
    std::unordered_map<int, int> next; // from-vertex -> to-vertex
    std::unordered_map<std::uint64_t, bool> is_boundary;
    for (const auto& e : table.edges)
        if (e.count == 1) is_boundary[edge_key(e.v0, e.v1)] = true;
    for (const auto& tri : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = tri[e], b = tri[(e + 1) % 3];
            if (is_boundary.count(edge_key(a, b))) {
                if (next.count(a))
                    throw std::runtime_error("vertex " + std::to_string(a) +
                                             " has multiple outgoing boundary edges");
                next[a] = b;
            }
        }
    }
    std::vector<std::vector<int>> loops;
    std::unordered_map<int, bool> used;
    for (const auto& [start, _] : next) {
        if (used.count(start)) continue;
        std::vector<int> loop;
        int v = start;
        do {
            loop.push_back(v);
            used[v] = true;
            auto it = next.find(v);
            if (it == next.end())
                throw std::runtime_error("open boundary chain at vertex " + std::to_string(v));
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }
    // Deterministic order: by smallest vertex index.
    std::sort(loops.begin(), loops.end(), [](const auto& a, const auto& b) {
        return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
    });
    return loops;
}

void validate_mesh(const TriMesh& mesh, const Tolerances& tol) {
    const int nv = mesh.vertex_count();
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= nv)
                throw std::runtime_error("triangle references invalid vertex index " +
                                         std::to_string(tri[k]));
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw std::runtime_error("triangle with repeated vertex indices");
    }
    if (!mesh.on_sphere.empty() && mesh.on_sphere.size() != mesh.vertices.size())
        throw std::runtime_error("boundary flag array size mismatch");
    for (int v = 0; v < nv; ++v) {
        const double r = mesh.vertices[v].norm();
        if (r > 1.0 + 1e4 * tol.geometric)
            throw std::runtime_error("vertex " + std::to_string(v) +
                                     " lies outside the unit ball: |x| = " + std::to_string(r));
        if (!mesh.on_sphere.empty() && mesh.on_sphere[v] && std::abs(r - 1.0) > tol.geometric)
            throw std::runtime_error("sphere-flagged vertex " + std::to_string(v) +
                                     " has |x| = " + std::to_string(r));
    }
    EdgeTable table = build_edge_table(mesh);
    if (!table.manifold) throw std::runtime_error(table.nonmanifold_message);
    // Interior edges must be traversed in opposite directions by their two
    // triangles; this is the orientability certificate for the stored winding.
    std::unordered_map<std::uint64_t, int> direction; // +1 seen as (v0,v1), -1 reversed
    for (const auto& tri : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = tri[e], b = tri[(e + 1) % 3];
            const std::uint64_t key = edge_key(a, b);
            const int dir = (a < b) ? 1 : -1;
            auto [it, inserted] = direction.try_emplace(key, dir);
            if (!inserted && it->second == dir)
                throw std::runtime_error("inconsistent winding across edge (" +
                                         std::to_string(std::min(a, b)) + "," +
                                         std::to_string(std::max(a, b)) + ")");
        }
    }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

double area(const TriMesh& mesh) {
    double total = 0.0;
    for (const auto& t : mesh.triangles)
        total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    return total;
}

int degenerate_triangle_count(const TriMesh& mesh, const Tolerances& tol) {
    if (mesh.triangles.empty()) return 0;
    std::vector<double> areas(mesh.triangles.size());
    double mean = 0.0;
    for (size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        areas[i] = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        mean += areas[i];
    }
    mean /= static_cast<double>(areas.size());
    int n = 0;
    for (double a : areas)
        if (a < tol.degenerate_area_rel * mean) ++n;
    return n;
}

TopologySummary topology(const TriMesh& mesh) {
    TopologySummary s;
    if (mesh.empty()) return s;
    EdgeTable table = build_edge_table(mesh);
    if (!table.manifold) throw std::runtime_error(table.nonmanifold_message);

    // Count only vertices actually referenced by triangles.
    std::vector<std::uint8_t> used(mesh.vertices.size(), 0);
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) used[t[k]] = 1;
    const int V = static_cast<int>(std::count(used.begin(), used.end(), 1));
    const int E = static_cast<int>(table.edges.size());
    const int F = mesh.triangle_count();
    s.euler_characteristic = V - E + F;
    s.boundary_components = static_cast<int>(boundary_loops(mesh).size());

    // Orientability of the stored winding.
    s.orientable = true;
    {
        std::unordered_map<std::uint64_t, int> direction;
        for (const auto& tri : mesh.triangles) {
            for (int e = 0; e < 3; ++e) {
                const int a = tri[e], b = tri[(e + 1) % 3];
                const int dir = (a < b) ? 1 : -1;
                auto [it, inserted] = direction.try_emplace(edge_key(a, b), dir);
                if (!inserted && it->second == dir) s.orientable = false;
            }
        }
    }

    // Components by shared edges; genus summed per component via the chi relation.
    DisjointSet ds(mesh.triangle_count());
    for (const auto& e : table.edges)
        if (e.count == 2) ds.unite(e.tri[0], e.tri[1]);
    std::map<int, std::vector<int>> comps;
    for (int t = 0; t < mesh.triangle_count(); ++t) comps[ds.find(t)].push_back(t);
    s.connected_components = static_cast<int>(comps.size());

    if (s.connected_components == 1) {
        s.genus = s.orientable ? (2 - s.euler_characteristic - s.boundary_components) / 2 : 0;
    } else {
        int genus_sum = 0;
        for (const auto& [root, tris] : comps) {
            TriMesh sub;
            sub.vertices = mesh.vertices;
            for (int t : tris) sub.triangles.push_back(mesh.triangles[t]);
            TopologySummary cs = topology(sub);
            genus_sum += cs.genus;
        }
        s.genus = genus_sum;
    }
    return s;
}

std::vector<Vec3> triangle_normals(const TriMesh& mesh) {
    std::vector<Vec3> normals(mesh.triangles.size());
    for (size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                     .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        const double len = n.norm();
        normals[i] = (len > 0.0) ? Vec3(n / len) : Vec3::Zero();
    }
    return normals;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
    std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
    for (const auto& t : mesh.triangles) {
        Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                     .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (int k = 0; k < 3; ++k) normals[t[k]] += n; // area weighting via cross magnitude
    }
    for (auto& n : normals) {
        const double len = n.norm();
        if (len > 0.0) n /= len;
    }
    return normals;
}

TriMesh transform(const TriMesh& mesh, const Eigen::Matrix3d& m) {
    TriMesh out = mesh;
    for (auto& v : out.vertices) v = m * v;
    // Labels stay valid only when m maps the sign-flip frame to itself; callers
    // that need labels afterwards rebuild them.
    bool signed_perm = true;
    for (int c = 0; c < 3 && signed_perm; ++c) {
        int nonzero = 0;
        for (int r = 0; r < 3; ++r) {
            const double a = std::abs(m(r, c));
            if (a > 1e-14 && std::abs(a - 1.0) > 1e-14) signed_perm = false;
            if (a > 0.5) ++nonzero;
        }
        if (nonzero != 1) signed_perm = false;
    }
    if (signed_perm) {
        if (out.has_orbit_labels()) rebuild_pri2_orbits(out);
    } else {
        out.orbit_rep.clear();
        out.orbit_sign.clear();
    }
    return out;
}

TriMesh subdivide_midpoint(const TriMesh& mesh) {
    TriMesh out;
    out.vertices = mesh.vertices;
    out.on_sphere = mesh.on_sphere;
    if (out.on_sphere.empty()) out.on_sphere.assign(mesh.vertices.size(), 0);
    std::unordered_map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) -> int {
        const std::uint64_t key = edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        Vec3 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
        std::uint8_t flag = 0;
        if (!mesh.on_sphere.empty() && mesh.on_sphere[a] && mesh.on_sphere[b]) {
            const double len = p.norm();
            if (len > 0.0) {
                p /= len;
                flag = 1;
            }
        }
        const int idx = static_cast<int>(out.vertices.size());
        out.vertices.push_back(p);
        out.on_sphere.push_back(flag);
        midpoint.emplace(key, idx);
        return idx;
    };
    out.triangles.reserve(mesh.triangles.size() * 4);
    for (const auto& t : mesh.triangles) {
        const int m01 = mid(t[0], t[1]);
        const int m12 = mid(t[1], t[2]);
        const int m20 = mid(t[2], t[0]);
        out.triangles.push_back({t[0], m01, m20});
        out.triangles.push_back({t[1], m12, m01});
        out.triangles.push_back({t[2], m20, m12});
        out.triangles.push_back({m01, m12, m20});
    }
    if (mesh.has_orbit_labels()) rebuild_pri2_orbits(out);
    return out;
}

double min_vertex_distance_to_axis(const TriMesh& mesh, int axis) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : mesh.vertices) {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k)
            if (k != axis) d2 += v[k] * v[k];
        best = std::min(best, std::sqrt(d2));
    }
    return best;
}

VertexLocator::VertexLocator(const std::vector<Vec3>& points) : points_(points) {
    const double target = std::cbrt(static_cast<double>(std::max<size_t>(points.size(), 1)));
    dim_ = std::max(1, static_cast<int>(target));
    cells_.resize(static_cast<size_t>(dim_) * dim_ * dim_);
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
        const auto c = coords(points_[i]);
        cells_[index_of(c[0], c[1], c[2])].push_back(i);
    }
}

size_t VertexLocator::index_of(int x, int y, int z) const {
    return (static_cast<size_t>(x) * dim_ + y) * dim_ + z;
}

std::array<int, 3> VertexLocator::coords(const Vec3& p) const {
    auto clampi = [&](double v) {
        return std::clamp(static_cast<int>((v + 1.0) / 2.0 * dim_), 0, dim_ - 1);
    };
    return {clampi(p.x()), clampi(p.y()), clampi(p.z())};
}

std::pair<int, double> VertexLocator::nearest(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    int best_index = -1;
    const auto c = coords(q);
    for (int ring = 0; ring <= dim_; ++ring) {
        for (int x = c[0] - ring; x <= c[0] + ring; ++x)
            for (int y = c[1] - ring; y <= c[1] + ring; ++y)
                for (int z = c[2] - ring; z <= c[2] + ring; ++z) {
                    if (x < 0 || y < 0 || z < 0 || x >= dim_ || y >= dim_ || z >= dim_) continue;
                    if (std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])}) !=
                        ring)
                        continue;
                    for (int i : cells_[index_of(x, y, z)]) {
                        const double d = (points_[i] - q).norm();
                        if (d < best) {
                            best = d;
                            best_index = i;
                        }
                    }
                }
        // Unscanned cells lie at Chebyshev index distance > ring, hence at
        // Euclidean distance >= ring * cell_size from q.
        if (best <= static_cast<double>(ring) * cell_size()) break;
    }
    return {best_index, best};
}

double hausdorff_vertex_distance(const TriMesh& a, const TriMesh& b) {
    if (a.vertices.empty() || b.vertices.empty())
        return (a.vertices.empty() && b.vertices.empty()) ? 0.0
                                                          : std::numeric_limits<double>::infinity();
    VertexLocator ga(a.vertices), gb(b.vertices);
    double h = 0.0;
    for (const auto& p : a.vertices) h = std::max(h, gb.nearest(p).second);
    for (const auto& p : b.vertices) h = std::max(h, ga.nearest(p).second);
    return h;
}

void rebuild_pri2_orbits(TriMesh& mesh) {
    const int nv = mesh.vertex_count();
    mesh.orbit_rep.assign(nv, -1);
    mesh.orbit_sign.assign(nv, 0);
    struct Key {
        double x, y, z;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            auto h = [](double v) {
                std::uint64_t bits;
                std::memcpy(&bits, &v, sizeof(bits));
                return std::hash<std::uint64_t>{}(bits);
            };
            return h(k.x) ^ (h(k.y) * 1315423911u) ^ (h(k.z) * 2654435761u);
        }
    };
    std::unordered_map<Key, std::vector<int>, KeyHash> groups;
    auto abs_key = [](const Vec3& v) {
        return Key{std::abs(v.x()), std::abs(v.y()), std::abs(v.z())};
    };
    for (int v = 0; v < nv; ++v) groups[abs_key(mesh.vertices[v])].push_back(v);
    for (auto& [key, members] : groups) {
        int rep = -1;
        for (int v : members) {
            const Vec3& p = mesh.vertices[v];
            if (p.x() >= 0.0 && p.y() >= 0.0 && p.z() >= 0.0) {
                rep = v;
                break;
            }
        }
        if (rep < 0)
            throw std::runtime_error(
                "rebuild_pri2_orbits: orbit without nonnegative representative; "
                "mesh is not exactly sign-equivariant");
        for (int v : members) {
            const Vec3& p = mesh.vertices[v];
            std::uint8_t sign = 0;
            for (int k = 0; k < 3; ++k)
                if (p[k] < 0.0) sign |= static_cast<std::uint8_t>(1u << k);
            mesh.orbit_rep[v] = rep;
            mesh.orbit_sign[v] = sign;
        }
    }
}

} // namespace fbms
