#pragma once

#include <utility>
#include <vector>

#include "fbms/mesh.hpp"
#include "fbms/symmetry.hpp"

namespace fbms {

enum class StepRule { Fixed, Backtracking };

struct FlowOptions {
    StepRule step_rule = StepRule::Backtracking;
    int max_iterations = 20000;
    double grad_tol_rel = 1e-6;  // stop when ||grad||_2 < grad_tol_rel * area
    int projection_cadence = 1;  // equivariance projection every k accepted steps
    // Unstable-mode handling: the flow reverses the currently negative
    // equivariant Jacobi directions so index-k critical points are reachable.
    // mode_refresh = 0 disables this (plain descent).
    int mode_refresh = 150;
    int max_unstable_modes = 3;
    double quality_floor = 1e-5; // abort when min triangle quality drops below
    double fixed_step = 1e-3;    // step for StepRule::Fixed
    // Tangential vertex redistribution, applied every smooth_every accepted
    // steps while the flow is far from criticality (it switches off once the
    // gradient norm falls below 50x the stopping threshold). Purely
    // parametrization maintenance; topology and symmetry are untouched.
    int smooth_every = 8;
    double smooth_weight = 0.3;
    SymmetryGroup group;         // empty -> pri_2
};

struct FlowReport {
    int iterations = 0;
    double final_area = 0.0;
    std::vector<double> area_history;
    double final_gradient_norm = 0.0;
    double boundary_orthogonality = 0.0;
    TopologySummary topology;
    bool converged = false;
    bool aborted_degenerate = false;
    bool aborted_line_search = false;
    bool area_monotone = true;   // exact for pure descent phases
    int unstable_modes_used = 0; // modes reversed in the final phase
};

// Exact gradient of total triangle area with respect to vertex positions;
// rows of sphere-flagged vertices are projected onto the sphere tangent plane.
std::vector<Vec3> area_gradient(const TriMesh& mesh);

// Gradient without the boundary tangent projection (the discrete conormal
// data used by the orthogonality residual).
std::vector<Vec3> area_gradient_raw(const TriMesh& mesh);

// Max over boundary vertices of the angle (radians) between the discrete
// conormal (the raw area gradient) and the outward radial direction.
double boundary_orthogonality_residual(const TriMesh& mesh);

// min over triangles of 4*sqrt(3)*area / (l1^2+l2^2+l3^2); 1 for equilateral.
double min_triangle_quality(const TriMesh& mesh);

std::pair<TriMesh, FlowReport> minimize(const TriMesh& start, const FlowOptions& opts);

} // namespace fbms
