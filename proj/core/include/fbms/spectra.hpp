#pragma once

#include <optional>
#include <string>

#include "fbms/eigs.hpp"
#include "fbms/mesh.hpp"
#include "fbms/symmetry.hpp"
#include "fbms/tolerances.hpp"

namespace fbms {

// Discrete pieces of the Jacobi problem -L phi = lambda phi with the Robin
// condition d_eta phi = phi on the spherical boundary (the quadratic form is
// Q(u,u) = u^T (S - diag(mass*potential) - B) u).
struct JacobiAssembly {
    SparseMat stiffness;          // cotan Laplace-Beltrami
    Eigen::VectorXd mass;         // lumped vertex areas
    Eigen::VectorXd potential;    // |A|^2 per vertex (Ric = 0 in the flat ball)
    SparseMat boundary_mass;      // consistent P1 edge mass on boundary loops
    double boundary_coefficient = 1.0; // the Robin coefficient on the unit sphere
    std::vector<int> boundary_vertices;
    std::vector<std::uint8_t> is_boundary;
};

JacobiAssembly assemble_jacobi(const TriMesh& mesh);

// Osculating-quadric (degree-2 jet) fit over the 2-ring of every vertex:
// squared shape-operator norm and a corrected unit normal field.
struct SurfaceJets {
    Eigen::VectorXd a2;
    std::vector<Vec3> normals;
};

SurfaceJets osculating_jets(const TriMesh& mesh);

// Squared second-fundamental-form norm per vertex.
Eigen::VectorXd shape_operator_norm_squared(const TriMesh& mesh);

enum class JacobiBoundaryCondition { Robin, Dirichlet };

struct SpectrumReport {
    std::string problem;   // "steklov" | "jacobi-robin" | "jacobi-dirichlet"
    std::string subspace;  // "full" | "equivariant"
    std::vector<double> eigenvalues; // ascending, first k
    int negative_count = 0;          // eigenvalues below -index_cutoff
    double index_cutoff = 0.0;
    double max_residual = 0.0;
    Eigen::MatrixXd eigenfunctions;  // per-vertex columns matching eigenvalues
};

SpectrumReport steklov_spectrum(const TriMesh& mesh, int k,
                                const Tolerances& tol = default_tolerances());

SpectrumReport jacobi_spectrum(const TriMesh& mesh, JacobiBoundaryCondition bc, int k,
                               const std::optional<SymmetryGroup>& equivariant_group = {},
                               const Tolerances& tol = default_tolerances());

// Q(u,u) / integral(u^2); consistent with jacobi_spectrum eigenvalues.
double variational_rayleigh(const TriMesh& mesh, const Eigen::VectorXd& u);

// Sign-character basis of the equivariant subspace: one column per admissible
// vertex orbit, entries sgn(g_v) on orbit members.
SparseMat equivariant_basis(const TriMesh& mesh, const SymmetryGroup& group);

struct XPerpResidual {
    double interior_residual = 0.0; // L2 norm of M^{-1}(S - P) u on interior vertices
    double boundary_max = 0.0;      // max |<x,nu>| over boundary vertices
};

XPerpResidual jacobi_residual_xperp(const TriMesh& mesh);

struct FundamentalDomainCensus {
    bool skipped_flat_disc = false;
    int chi = 0;
    int smooth_edges = 0; // j: maximal boundary arcs between corner vertices
    bool gauss_bonnet_identity = false; // 4*chi == j - 1
    bool single_spherical_arc = false;
    int boundary_loops = 0;
};

// Clip a prismatic-equivariant mesh to the octant and count (chi, j).
FundamentalDomainCensus fundamental_domain_census(const TriMesh& mesh,
                                                  const Tolerances& tol = default_tolerances());

struct ParityVerdict {
    bool pass = false;
    bool flat_disc_exception = false;
    int boundary_components = 0;
    std::string reason;
};

// Boundary components even, or the mesh is a coordinate flat disc.
ParityVerdict boundary_parity_check(const TriMesh& mesh,
                                    const Tolerances& tol = default_tolerances());

} // namespace fbms
