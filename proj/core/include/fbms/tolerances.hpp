#pragma once

namespace fbms {

// Central tolerance record. Every module reads its thresholds from here so a
// single override propagates consistently.
struct Tolerances {
    // |x| <= 1 + geometric and boundary vertices satisfy ||x| - 1| <= geometric.
    double geometric = 1e-9;
    // Target for volume integrals and quadrature-adjacent checks.
    double integral = 1e-6;
    // Relative quadrature tolerance for the revolution-area integral.
    double quadrature_rel = 1e-10;
    // Absolute tolerance for scalar root solves.
    double root_abs = 1e-14;
    // Triangles with area below this fraction of the mean are flagged degenerate.
    double degenerate_area_rel = 1e-12;
    // Matrix-group checks (orthogonality, closure).
    double group = 1e-12;
    // A point is fixed by g if |g x - x| < isotropy.
    double isotropy = 1e-9;
    // Negative-eigenvalue cutoff, relative to the largest |lambda| computed.
    // 1e-6 undercounts: discretized zero modes land at O(h^2) on desk-scale
    // meshes, so the cutoff must sit inside the spectral gap instead.
    double index_rel = 2e-3;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

} // namespace fbms
