#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbms/tolerances.hpp"

namespace fbms {

using Vec3 = Eigen::Vector3d;

// Indexed triangle surface in the closed unit ball. Values are treated as
// immutable after construction; mutating helpers return new meshes.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    // Per-vertex marker: vertex lies on the unit sphere.
    std::vector<std::uint8_t> on_sphere;
    // Optional prismatic orbit labels (see symmetry module):
    // orbit_rep[v]  = vertex index of the representative with all coords >= 0,
    // orbit_sign[v] = bitmask of coordinate sign flips mapping rep -> v
    //                 (bit i set <=> coordinate i negated).
    std::vector<int> orbit_rep;
    std::vector<std::uint8_t> orbit_sign;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
    bool empty() const { return triangles.empty(); }
    bool has_orbit_labels() const {
        return !orbit_rep.empty() && orbit_rep.size() == vertices.size();
    }
};

struct TopologySummary {
    int euler_characteristic = 0;
    int genus = 0;
    int boundary_components = 0;
    bool orientable = true;
    int connected_components = 0;

    bool operator==(const TopologySummary&) const = default;
};

// Undirected edge adjacency, built on demand.
struct EdgeTable {
    struct Edge {
        int v0, v1;          // v0 < v1
        int tri[2];          // incident triangles, -1 if absent
        int count;           // number of incident triangles (may exceed 2 for errors)
    };
    std::vector<Edge> edges;
    bool manifold = true;
    std::string nonmanifold_message;
};

EdgeTable build_edge_table(const TriMesh& mesh);

// Boundary loops as vertex cycles, oriented by the induced triangle winding.
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh);

// Structural validation: index ranges, distinct indices per triangle, manifold
// edges, opposite traversal of shared edges, |x| <= 1 + tol and boundary
// flags consistent with |x| = 1. Throws std::runtime_error on violation.
void validate_mesh(const TriMesh& mesh, const Tolerances& tol = default_tolerances());

TopologySummary topology(const TriMesh& mesh);

double area(const TriMesh& mesh);
double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

// Number of triangles whose area falls below degenerate_area_rel * mean area.
int degenerate_triangle_count(const TriMesh& mesh,
                              const Tolerances& tol = default_tolerances());

// Area-weighted vertex normals (unit where defined).
std::vector<Vec3> vertex_normals(const TriMesh& mesh);
std::vector<Vec3> triangle_normals(const TriMesh& mesh);

// Apply an orthogonal (or general linear) map to all vertices. Orbit labels
// survive only for signed coordinate permutations of the prismatic frame;
// otherwise they are dropped.
TriMesh transform(const TriMesh& mesh, const Eigen::Matrix3d& m);

// Uniform midpoint (1:4) subdivision. Midpoints of sphere-flagged edges are
// reprojected onto the unit sphere so boundary flags stay exact.
TriMesh subdivide_midpoint(const TriMesh& mesh);

// Min distance from any vertex to the coordinate axis (0=x1, 1=x2, 2=x3).
double min_vertex_distance_to_axis(const TriMesh& mesh, int axis);

// Uniform-grid nearest-vertex queries over a fixed point set in [-1,1]^3.
class VertexLocator {
public:
    explicit VertexLocator(const std::vector<Vec3>& points);
    // Index of the nearest point and its distance.
    std::pair<int, double> nearest(const Vec3& query) const;

private:
    std::vector<Vec3> points_;
    int dim_;
    std::vector<std::vector<int>> cells_;
    double cell_size() const { return 2.0 / dim_; }
    size_t index_of(int x, int y, int z) const;
    std::array<int, 3> coords(const Vec3& p) const;
};

// Symmetric Hausdorff distance between the vertex samples of two meshes.
double hausdorff_vertex_distance(const TriMesh& a, const TriMesh& b);

// Rebuild prismatic orbit labels from positions. Requires the mesh to be
// exactly equivariant under coordinate sign flips (constructors guarantee
// this); throws otherwise.
void rebuild_pri2_orbits(TriMesh& mesh);

} // namespace fbms
