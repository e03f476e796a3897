#include "fbms/symmetry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fbms {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix3d rotation(double angle, const Vec3& axis) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Eigen::Matrix3d reflection_across_plane(const Vec3& normal) {
    const Vec3 n = normal.normalized();
    return Eigen::Matrix3d::Identity() - 2.0 * n * n.transpose();
}

std::string quantized_key(const Eigen::Matrix3d& m) {
    std::ostringstream ss;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            ss << static_cast<long long>(std::llround(m(r, c) * 1e7)) << ",";
    return ss.str();
}

std::vector<Eigen::Matrix3d> close_group(const std::vector<Eigen::Matrix3d>& generators,
                                         int expected_order) {
    std::vector<Eigen::Matrix3d> elements{Eigen::Matrix3d::Identity()};
    std::set<std::string> seen{quantized_key(elements[0])};
    std::vector<Eigen::Matrix3d> frontier = elements;
    while (!frontier.empty()) {
        std::vector<Eigen::Matrix3d> next;
        for (const auto& f : frontier) {
            for (const auto& g : generators) {
                Eigen::Matrix3d p = g * f;
                if (seen.insert(quantized_key(p)).second) {
                    elements.push_back(p);
                    next.push_back(p);
                    if (static_cast<int>(elements.size()) > 4 * expected_order + 8)
                        throw std::runtime_error("group closure exceeded expected order");
                }
            }
        }
        frontier = std::move(next);
    }
    if (static_cast<int>(elements.size()) != expected_order)
        throw std::runtime_error("group closure produced order " +
                                 std::to_string(elements.size()) + ", expected " +
                                 std::to_string(expected_order));
    // Snap entries that are 0 or +-1 up to closure rounding, so that sign-flip
    // elements act exactly on coordinates.
    for (auto& m : elements)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double& v = m(r, c);
                if (std::abs(v) < 1e-12) v = 0.0;
                else if (std::abs(v - 1.0) < 1e-12) v = 1.0;
                else if (std::abs(v + 1.0) < 1e-12) v = -1.0;
            }
    // Deterministic order: identity first, then lexicographic by quantized entries.
    std::sort(elements.begin() + 1, elements.end(),
              [](const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
                  return quantized_key(a) < quantized_key(b);
              });
    return elements;
}

const Vec3 kDiagonalAxis = Vec3(1.0, 1.0, 1.0).normalized();

Vec3 icosahedral_c5_axis() {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    return Vec3(0.0, 1.0, phi).normalized();
}

} // namespace

const std::vector<std::string>& catalog_family_names() {
    static const std::vector<std::string> names = {
        "cyclic",           "dihedral",         "pyramidal",        "prismatic",
        "antiprismatic",    "pro-prismatic",    "pro-antiprismatic", "chiro-tetrahedral",
        "chiro-octahedral", "chiro-icosahedral", "pyritohedral",     "tetrahedral",
        "octahedral",       "icosahedral"};
    return names;
}

SymmetryGroup group_from_catalog(const std::string& name, int n) {
    const Vec3 e1(1, 0, 0), e3(0, 0, 1);
    const Eigen::Matrix3d mirror_z = reflection_across_plane(e3);
    std::vector<Eigen::Matrix3d> gens;
    int expected = 0;
    bool parametrized = true;

    auto need = [&](int min_n) {
        if (n < min_n)
            throw std::invalid_argument("catalog family '" + name + "' requires n >= " +
                                        std::to_string(min_n) + ", got " + std::to_string(n));
    };

    if (name == "cyclic") {
        need(1);
        if (n > 1) gens.push_back(rotation(2.0 * kPi / n, e3));
        expected = n;
    } else if (name == "dihedral") {
        need(2);
        gens = {rotation(2.0 * kPi / n, e3), rotation(kPi, e1)};
        expected = 2 * n;
    } else if (name == "pyramidal") {
        need(2);
        gens = {rotation(2.0 * kPi / n, e3), reflection_across_plane(Vec3(0, 1, 0))};
        expected = 2 * n;
    } else if (name == "prismatic") {
        need(2);
        gens = {mirror_z, rotation(kPi, e1), rotation(2.0 * kPi / n, e3)};
        expected = 4 * n;
    } else if (name == "antiprismatic") {
        need(2);
        const double half = kPi / (2.0 * n);
        const Vec3 sigma_d_normal(-std::sin(half), std::cos(half), 0.0);
        gens = {rotation(2.0 * kPi / n, e3), rotation(kPi, e1),
                reflection_across_plane(sigma_d_normal)};
        expected = 4 * n;
    } else if (name == "pro-prismatic") {
        need(2);
        gens = {rotation(2.0 * kPi / n, e3), mirror_z};
        expected = 2 * n;
    } else if (name == "pro-antiprismatic") {
        need(2);
        gens = {Eigen::Matrix3d(rotation(kPi / n, e3) * mirror_z)};
        expected = 2 * n;
    } else {
        parametrized = false;
        const Eigen::Matrix3d inversion = -Eigen::Matrix3d::Identity();
        Eigen::Matrix3d swap_xy = Eigen::Matrix3d::Identity();
        swap_xy(0, 0) = swap_xy(1, 1) = 0.0;
        swap_xy(0, 1) = swap_xy(1, 0) = 1.0;
        if (name == "chiro-tetrahedral") {
            gens = {rotation(kPi, e3), rotation(2.0 * kPi / 3.0, kDiagonalAxis)};
            expected = 12;
        } else if (name == "chiro-octahedral") {
            gens = {rotation(kPi / 2.0, e3), rotation(2.0 * kPi / 3.0, kDiagonalAxis)};
            expected = 24;
        } else if (name == "chiro-icosahedral") {
            gens = {rotation(kPi, e3), rotation(2.0 * kPi / 5.0, icosahedral_c5_axis())};
            expected = 60;
        } else if (name == "pyritohedral") {
            gens = {rotation(kPi, e3), rotation(2.0 * kPi / 3.0, kDiagonalAxis), inversion};
            expected = 24;
        } else if (name == "tetrahedral") {
            gens = {rotation(kPi, e3), rotation(2.0 * kPi / 3.0, kDiagonalAxis), swap_xy};
            expected = 24;
        } else if (name == "octahedral") {
            gens = {rotation(kPi / 2.0, e3), rotation(2.0 * kPi / 3.0, kDiagonalAxis), inversion};
            expected = 48;
        } else if (name == "icosahedral") {
            gens = {rotation(kPi, e3), rotation(2.0 * kPi / 5.0, icosahedral_c5_axis()),
                    inversion};
            expected = 120;
        } else {
            throw std::invalid_argument("unknown catalog family: " + name);
        }
    }

    SymmetryGroup group;
    group.catalog_name = name;
    group.order_parameter = parametrized ? n : 0;
    group.elements = close_group(gens, expected);
    return group;
}

SymmetryGroup prismatic_group(int n) { return group_from_catalog("prismatic", n); }

void check_group_axioms(const SymmetryGroup& group, double tol) {
    const auto& els = group.elements;
    if (els.empty() || !els[0].isIdentity(tol))
        throw std::runtime_error("group does not start with the identity");
    std::vector<std::string> keys;
    keys.reserve(els.size());
    for (const auto& g : els) {
        if (((g.transpose() * g) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
            throw std::runtime_error("group element is not orthogonal within tolerance");
        const double d = g.determinant();
        if (std::min(std::abs(d - 1.0), std::abs(d + 1.0)) > 10 * tol)
            throw std::runtime_error("group element determinant is not +-1");
        keys.push_back(quantized_key(g));
    }
    auto find_element = [&](const Eigen::Matrix3d& m) {
        const std::string key = quantized_key(m);
        for (size_t i = 0; i < keys.size(); ++i)
            if (keys[i] == key && (els[i] - m).cwiseAbs().maxCoeff() < 1e3 * tol) return true;
        return false;
    };
    for (const auto& a : els) {
        if (!find_element(a.transpose()))
            throw std::runtime_error("group is missing an inverse element");
        for (const auto& b : els)
            if (!find_element(a * b)) throw std::runtime_error("group is not closed");
    }
}

std::vector<SingularStratum> singular_locus(const SymmetryGroup& group) {
    const double tol = 1e-9;
    std::vector<Vec3> lines, planes;
    auto add_unique = [&](std::vector<Vec3>& list, Vec3 v) {
        v.normalize();
        // Canonical sign: first nonzero component positive.
        for (int k = 0; k < 3; ++k) {
            if (std::abs(v[k]) > 1e-9) {
                if (v[k] < 0) v = -v;
                break;
            }
        }
        for (const auto& u : list)
            if ((u - v).norm() < 1e-7) return;
        list.push_back(v);
    };

    for (size_t i = 1; i < group.elements.size(); ++i) {
        const Eigen::Matrix3d& g = group.elements[i];
        const double det = g.determinant();
        if (det > 0.0) {
            // Rotation: axis spans the +1 eigenspace.
            Eigen::JacobiSVD<Eigen::Matrix3d> svd(g - Eigen::Matrix3d::Identity(),
                                                  Eigen::ComputeFullV);
            if (svd.singularValues()(2) < tol) add_unique(lines, svd.matrixV().col(2));
        } else if (std::abs(g.trace() - 1.0) < 1e-7) {
            // Reflection: plane normal spans the -1 eigenspace.
            Eigen::JacobiSVD<Eigen::Matrix3d> svd(g + Eigen::Matrix3d::Identity(),
                                                  Eigen::ComputeFullV);
            add_unique(planes, svd.matrixV().col(2));
        }
        // Rotoreflections fix only the origin.
    }

    std::vector<SingularStratum> strata;
    for (const auto& dir : lines) {
        int rotations = 0;
        bool mirrored = false;
        for (const auto& g : group.elements) {
            if ((g * dir - dir).norm() < tol) {
                if (g.determinant() > 0.0)
                    ++rotations; // cyclic stabilizer, identity included
                else
                    mirrored = true;
            }
        }
        SingularStratum s;
        s.dimension = 1;
        s.geometry = dir;
        s.isotropy_label = (mirrored ? "*" : "") + std::to_string(rotations) +
                           std::to_string(rotations);
        strata.push_back(s);
    }
    for (const auto& normal : planes) {
        SingularStratum s;
        s.dimension = 2;
        s.geometry = normal;
        s.isotropy_label = "*11";
        strata.push_back(s);
    }
    std::sort(strata.begin(), strata.end(), [](const SingularStratum& a, const SingularStratum& b) {
        if (a.dimension != b.dimension) return a.dimension < b.dimension;
        if (a.isotropy_label != b.isotropy_label) return a.isotropy_label < b.isotropy_label;
        for (int k = 0; k < 3; ++k)
            if (std::abs(a.geometry[k] - b.geometry[k]) > 1e-9) return a.geometry[k] < b.geometry[k];
        return false;
    });
    return strata;
}

std::map<std::string, int> stratum_census(const std::vector<SingularStratum>& strata) {
    std::map<std::string, int> census;
    for (const auto& s : strata) {
        const std::string kind = (s.dimension == 1) ? "line " : "plane ";
        ++census[kind + s.isotropy_label];
    }
    return census;
}

int sign_character(const Eigen::Matrix3d& element, const TriMesh& mesh) {
    if (mesh.empty()) throw std::invalid_argument("sign_character: empty mesh");
    const auto normals = vertex_normals(mesh);
    const VertexLocator locator(mesh.vertices);
    int positive = 0, negative = 0;
    const int nv = mesh.vertex_count();
    const int stride = std::max(1, nv / 4000);
    for (int v = 0; v < nv; v += stride) {
        const Vec3 y = element * mesh.vertices[v];
        const auto [best, dist] = locator.nearest(y);
        if (best < 0 || dist > 1e-5)
            throw std::runtime_error("sign_character: mesh is not equivariant under the element");
        if (normals[v].norm() < 0.5 || normals[best].norm() < 0.5) continue;
        const double dot = (element * normals[v]).dot(normals[best]);
        if (dot > 0.5)
            ++positive;
        else if (dot < -0.5)
            ++negative;
        else
            throw std::runtime_error("sign_character: ambiguous normal alignment");
    }
    if (positive > 0 && negative > 0)
        throw std::runtime_error("sign_character: inconsistent sign across the mesh");
    if (positive == 0 && negative == 0)
        throw std::runtime_error("sign_character: no usable normal samples");
    return positive > 0 ? 1 : -1;
}

namespace {

bool is_sign_diagonal(const Eigen::Matrix3d& g, std::uint8_t* mask_out) {
    std::uint8_t mask = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            const double v = g(r, c);
            if (r == c) {
                if (std::abs(std::abs(v) - 1.0) > 1e-12) return false;
                if (v < 0.0) mask |= static_cast<std::uint8_t>(1u << r);
            } else if (std::abs(v) > 1e-12) {
                return false;
            }
        }
    if (mask_out) *mask_out = mask;
    return true;
}

inline Vec3 apply_mask(const Vec3& x, std::uint8_t mask) {
    return Vec3(mask & 1 ? -x.x() : x.x(), mask & 2 ? -x.y() : x.y(),
                mask & 4 ? -x.z() : x.z());
}

} // namespace

TriMesh project_equivariant(const TriMesh& mesh, const SymmetryGroup& group) {
    if (!mesh.has_orbit_labels())
        throw std::invalid_argument(
            "project_equivariant: mesh has no orbit labels; build it with the "
            "equivariant constructors (revolve_to_mesh, build_slice, ...)");
    std::vector<std::uint8_t> masks;
    masks.reserve(group.elements.size());
    for (const auto& g : group.elements) {
        std::uint8_t m = 0;
        if (!is_sign_diagonal(g, &m))
            throw std::invalid_argument(
                "project_equivariant: group element is not a coordinate sign flip; "
                "orbit labels cover the prismatic pri_2 frame only");
        masks.push_back(m);
    }

    TriMesh out = mesh;
    const int nv = mesh.vertex_count();
    // Group member vertices by representative.
    std::vector<std::vector<int>> members(nv);
    for (int v = 0; v < nv; ++v) members[mesh.orbit_rep[v]].push_back(v);

    for (int r = 0; r < nv; ++r) {
        if (members[r].empty()) continue;
        // Active bits: coordinates the orbit actually varies in, read off the
        // stored sign masks. (Reading them off the representative's position
        // would silently drop the stabilizer once a symmetry-plane coordinate
        // drifts off exact zero, and the drift would never be re-zeroed.)
        std::uint8_t active = 0;
        for (int v : members[r]) active |= mesh.orbit_sign[v];
        int lookup[8];
        std::fill(std::begin(lookup), std::end(lookup), -1);
        for (int v : members[r]) lookup[mesh.orbit_sign[v] & active] = v;

        Vec3 avg = Vec3::Zero();
        int used = 0;
        for (std::uint8_t gm : masks) {
            const int v = lookup[gm & active];
            if (v < 0) continue; // partial orbit (clipped constructions); average what exists
            avg += apply_mask(mesh.vertices[v], gm); // g^{-1} x_{g.r}; sign flips are involutive
            ++used;
        }
        if (used == 0) continue;
        avg /= static_cast<double>(used);
        const bool boundary = !mesh.on_sphere.empty() && mesh.on_sphere[r];
        if (boundary) {
            const double len = avg.norm();
            if (len > 0.0) avg /= len;
        }
        for (int v : members[r]) out.vertices[v] = apply_mask(avg, mesh.orbit_sign[v]);
    }
    return out;
}

double equivariance_deviation(const TriMesh& mesh, const SymmetryGroup& group) {
    double worst = 0.0;
    for (size_t i = 1; i < group.elements.size(); ++i)
        worst = std::max(worst, hausdorff_vertex_distance(mesh, transform(mesh, group.elements[i])));
    return worst;
}

std::string group_to_json(const SymmetryGroup& group) {
    nlohmann::json j;
    j["catalog_name"] = group.catalog_name;
    j["n"] = group.order_parameter;
    j["order"] = group.order();
    auto& mats = j["elements"] = nlohmann::json::array();
    for (const auto& g : group.elements) {
        std::vector<double> row_major;
        row_major.reserve(9);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) row_major.push_back(g(r, c));
        mats.push_back(row_major);
    }
    return j.dump(2);
}

std::string strata_to_json(const std::vector<SingularStratum>& strata) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : strata) {
        nlohmann::json e;
        e["dimension"] = s.dimension;
        e["kind"] = (s.dimension == 1) ? "line" : "plane";
        e["geometry"] = {s.geometry.x(), s.geometry.y(), s.geometry.z()};
        e["isotropy"] = s.isotropy_label;
        j.push_back(e);
    }
    return j.dump(2);
}

} // namespace fbms
