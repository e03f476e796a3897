#pragma once

#include <cstdint>

#include "fbms/mesh.hpp"

namespace fbms {

// Surface piece inside the closed region {x_k >= 0 for k in plane_mask}.
// Vertices meant to lie on a symmetry plane must carry an exact 0.0 in that
// coordinate; the reflector welds copies through those vertices.
struct FundamentalPatch {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::uint8_t> on_sphere;
};

// Reflect the patch through the coordinate planes selected by plane_mask
// (bit k = plane {x_k = 0}) and weld into a single mesh with exact sign
// equivariance and prismatic orbit labels. Reflected copies are rewound so the
// global orientation stays consistent.
TriMesh reflect_signs(const FundamentalPatch& patch, std::uint8_t plane_mask);

// Flip triangles until every shared edge is traversed in opposite directions,
// per connected component. Throws when the patch is non-orientable.
void orient_consistently(FundamentalPatch& patch);

// Equatorial disc (flat, z = 0) with pri_2 orbit labels; `segments` around the
// full circle (multiple of 4), `rings` radial subdivisions.
TriMesh build_equatorial_disc(int rings, int segments);

} // namespace fbms
