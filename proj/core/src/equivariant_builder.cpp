#include "fbms/equivariant_builder.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace fbms {

namespace {

inline Vec3 apply_mask(const Vec3& x, std::uint8_t mask) {
    return Vec3(mask & 1 ? -x.x() : x.x(), mask & 2 ? -x.y() : x.y(),
                mask & 4 ? -x.z() : x.z());
}

} // namespace

TriMesh reflect_signs(const FundamentalPatch& patch, std::uint8_t plane_mask) {
    const int nv = static_cast<int>(patch.vertices.size());
    if (patch.on_sphere.size() != patch.vertices.size())
        throw std::invalid_argument("patch flag array size mismatch");

    std::vector<std::uint8_t> zero_bits(nv, 0);
    for (int v = 0; v < nv; ++v) {
        for (int k = 0; k < 3; ++k) {
            if (patch.vertices[v][k] == 0.0) zero_bits[v] |= static_cast<std::uint8_t>(1u << k);
            if (patch.vertices[v][k] < 0.0 && (plane_mask & (1u << k)))
                throw std::invalid_argument("patch vertex has negative coordinate " +
                                            std::to_string(k));
        }
    }

    std::vector<std::uint8_t> masks;
    for (std::uint8_t m = 0; m < 8; ++m)
        if ((m & ~plane_mask) == 0) masks.push_back(m);

    TriMesh mesh;
    // global id per (local vertex, canonical mask)
    std::unordered_map<std::uint32_t, int> global_id;
    auto key_of = [](int v, std::uint8_t m) {
        return (static_cast<std::uint32_t>(v) << 3) | m;
    };
    std::vector<int> local_to_global(static_cast<size_t>(nv) * 8, -1);

    for (std::uint8_t m : masks) {
        for (int v = 0; v < nv; ++v) {
            const std::uint8_t canonical = m & static_cast<std::uint8_t>(~zero_bits[v]);
            const std::uint32_t key = key_of(v, canonical);
            auto it = global_id.find(key);
            int gid;
            if (it == global_id.end()) {
                gid = mesh.vertex_count();
                global_id.emplace(key, gid);
                mesh.vertices.push_back(apply_mask(patch.vertices[v], canonical));
                mesh.on_sphere.push_back(patch.on_sphere[v]);
                mesh.orbit_rep.push_back(-1);
                mesh.orbit_sign.push_back(canonical);
            } else {
                gid = it->second;
            }
            local_to_global[static_cast<size_t>(v) * 8 + m] = gid;
        }
    }
    // Representatives are the identity-copy vertices.
    for (std::uint8_t m : masks)
        for (int v = 0; v < nv; ++v) {
            const int gid = local_to_global[static_cast<size_t>(v) * 8 + m];
            mesh.orbit_rep[gid] = local_to_global[static_cast<size_t>(v) * 8 + 0];
        }

    for (std::uint8_t m : masks) {
        const bool flip = (std::popcount(m) % 2) == 1;
        for (const auto& t : patch.triangles) {
            std::array<int, 3> g = {local_to_global[static_cast<size_t>(t[0]) * 8 + m],
                                    local_to_global[static_cast<size_t>(t[1]) * 8 + m],
                                    local_to_global[static_cast<size_t>(t[2]) * 8 + m]};
            if (flip) std::swap(g[1], g[2]);
            mesh.triangles.push_back(g);
        }
    }
    return mesh;
}

void orient_consistently(FundamentalPatch& patch) {
    struct EdgeRef {
        int tri;
        bool forward; // edge appears as (lo, hi) in the triangle's winding
    };
    std::unordered_map<std::uint64_t, std::vector<EdgeRef>> edges;
    auto key = [](int a, int b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    auto register_tri = [&](int t) {
        const auto& tri = patch.triangles[t];
        for (int e = 0; e < 3; ++e) {
            const int a = tri[e], b = tri[(e + 1) % 3];
            edges[key(a, b)].push_back({t, a < b});
        }
    };
    for (int t = 0; t < static_cast<int>(patch.triangles.size()); ++t) register_tri(t);

    std::vector<int> state(patch.triangles.size(), 0); // 0 unseen, 1 keep, -1 flip
    std::vector<int> stack;
    for (int seed = 0; seed < static_cast<int>(patch.triangles.size()); ++seed) {
        if (state[seed] != 0) continue;
        state[seed] = 1;
        stack.push_back(seed);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const auto& tri = patch.triangles[t];
            for (int e = 0; e < 3; ++e) {
                const int a = tri[e], b = tri[(e + 1) % 3];
                for (const EdgeRef& ref : edges[key(a, b)]) {
                    if (ref.tri == t) continue;
                    // Consistent orientation: the neighbour must traverse the
                    // shared edge in the opposite direction.
                    const bool this_forward = a < b;
                    const int wanted = (ref.forward == this_forward)
                                           ? -state[t]
                                           : state[t];
                    if (state[ref.tri] == 0) {
                        state[ref.tri] = wanted;
                        stack.push_back(ref.tri);
                    } else if (state[ref.tri] != wanted) {
                        throw std::runtime_error("patch is not orientable");
                    }
                }
            }
        }
    }
    for (int t = 0; t < static_cast<int>(patch.triangles.size()); ++t)
        if (state[t] == -1) std::swap(patch.triangles[t][1], patch.triangles[t][2]);
}

TriMesh build_equatorial_disc(int rings, int segments) {
    if (rings < 2 || segments < 8 || segments % 4 != 0)
        throw std::invalid_argument("disc needs rings >= 2 and segments >= 8 divisible by 4");
    const int cols = segments / 4;
    FundamentalPatch patch;
    auto vid = [&](int i, int j) { return 1 + (j - 1) * (cols + 1) + i; };
    patch.vertices.push_back(Vec3(0, 0, 0)); // center
    patch.on_sphere.push_back(0);
    for (int j = 1; j <= rings; ++j) {
        const double rho = static_cast<double>(j) / rings;
        for (int i = 0; i <= cols; ++i) {
            const double theta = (0.5 * M_PI) * i / cols;
            double x = rho * std::cos(theta);
            double y = rho * std::sin(theta);
            if (i == 0) y = 0.0;
            if (i == cols) x = 0.0;
            patch.vertices.push_back(Vec3(x, y, 0.0));
            patch.on_sphere.push_back(j == rings ? 1 : 0);
        }
    }
    for (int i = 0; i < cols; ++i) patch.triangles.push_back({0, vid(i, 1), vid(i + 1, 1)});
    for (int j = 1; j < rings; ++j) {
        for (int i = 0; i < cols; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            patch.triangles.push_back({a, c, b});
            patch.triangles.push_back({a, d, c});
        }
    }
    orient_consistently(patch);
    return reflect_signs(patch, 0b011);
}

} // namespace fbms
