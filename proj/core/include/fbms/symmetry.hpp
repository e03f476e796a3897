#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "fbms/mesh.hpp"

namespace fbms {

// Finite subgroup of O(3) in the coordinates where x3 carries the n-fold
// axis, x1 the in-plane two-fold axis, and {x3=0} the horizontal mirror.
struct SymmetryGroup {
    std::string catalog_name;
    int order_parameter = 0;               // the n of the family, 0 if not applicable
    std::vector<Eigen::Matrix3d> elements;  // first element is the identity

    int order() const { return static_cast<int>(elements.size()); }
};

struct SingularStratum {
    int dimension = 1;            // 1 = line through origin, 2 = plane through origin
    Vec3 geometry = Vec3::Zero(); // line direction or plane normal, unit
    std::string isotropy_label;   // orbifold string, e.g. "22", "*33", "*11"
};

const std::vector<std::string>& catalog_family_names();

// Concrete matrix realization of a Table-2 family. Throws std::invalid_argument
// for unknown names or out-of-range n.
SymmetryGroup group_from_catalog(const std::string& name, int n);

// Convenience: the prismatic group pri_n.
SymmetryGroup prismatic_group(int n);

// Verify closure, identity, inverses and orthogonality within tolerance.
void check_group_axioms(const SymmetryGroup& group, double tol = 1e-12);

// Fixed-point strata of the non-identity elements: lines with labels nn/*nn
// and planes with label *11. Deterministically ordered.
std::vector<SingularStratum> singular_locus(const SymmetryGroup& group);

// label -> count, for comparisons against the catalog table.
std::map<std::string, int> stratum_census(const std::vector<SingularStratum>& strata);

// +1 if the pushed-forward unit normal agrees with the normal at matched
// points, -1 if it flips; throws when the sign is inconsistent over the mesh
// or points cannot be matched.
int sign_character(const Eigen::Matrix3d& element, const TriMesh& mesh);

// Replace vertex positions by the orbit-consistent group average, using the
// mesh's prismatic orbit labels. Group elements must be sign-diagonal.
TriMesh project_equivariant(const TriMesh& mesh, const SymmetryGroup& group);

// max over group elements of the symmetric Hausdorff distance between the
// mesh and its transform.
double equivariance_deviation(const TriMesh& mesh, const SymmetryGroup& group);

std::string group_to_json(const SymmetryGroup& group);
std::string strata_to_json(const std::vector<SingularStratum>& strata);

} // namespace fbms
