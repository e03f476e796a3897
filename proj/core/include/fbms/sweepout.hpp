#pragma once

#include <optional>
#include <vector>

#include "fbms/catenoid.hpp"
#include "fbms/mesh.hpp"

namespace fbms {

// Two-parameter prismatic family: annulus K_{beta(s,t),t} about the x3-axis
// joined by two sphere-hugging ribbons of meridian half-width eps(s,t) through
// (+-1,0,0). beta(0,t) = alpha(t) exactly; the neck exponent beta*t is smoothly
// capped so slice areas stay below 2*pi with margin and collapse as t -> 0.
struct SweepoutParams {
    double t0 = 0.2;    // low-height cutoff
    double eps0 = 0.05; // ribbon half-width scale
    OptimalSweepoutSpec alpha_spec{};

    // neck exponent cap: m_high for t >= t0, blending down to m_low below
    // blend_lo, and collapsing linearly as t -> 0
    double m_high = 18.0;
    double m_low = 2.0;
    double blend_lo = 0.12;
    double collapse_slope = 25.0;
    // exponent of the low-t annulus about the x2-axis on the s=1 edge
    double edge1_tube_exponent = 4.0;
    // ribbon width is capped at eps_safety * (1 - sech(beta t)) so the lens
    // never swallows the annulus waist
    double eps_safety = 0.6;

    // mesh resolution
    int azimuthal = 96;   // full-circle azimuthal segments (multiple of 4)
    int rows = 24;        // rows per half-height of the quarter patch
    int ribbon_cols = 12; // junction samples across the half-ribbon
    int smoothing_passes = 2;
};

double sweepout_beta(double s, double t, const SweepoutParams& params);
double sweepout_eps(double s, double t, const SweepoutParams& params);

// Genus-one slice for (s,t) in (0,1) x (0,1).
TriMesh build_slice(double s, double t, const SweepoutParams& params);

// side 0: the annulus K_{alpha(t),t} about x3. side 1: two near-flat discs at
// |x3| = t joined by the two ribbons (annulus about x2).
TriMesh build_edge_slice(int side, double t, const SweepoutParams& params);

// Low-height completion, t in (0, t0): the capped construction itself.
TriMesh extend_low_t(double s, double t, const SweepoutParams& params);

struct SweepoutCell {
    double s = 0.0, t = 0.0;
    double area = 0.0;
    bool empty = false;
    TopologySummary topo;
    double equivariance = 0.0; // filled when requested
};

struct SweepoutGrid {
    std::vector<double> s_values, t_values;
    std::vector<SweepoutCell> cells; // row-major, t outer, s inner
    double max_area = 0.0;
    int argmax_s = -1, argmax_t = -1;

    const SweepoutCell& cell(int is, int it) const {
        return cells[static_cast<size_t>(it) * s_values.size() + is];
    }
};

SweepoutGrid scan_grid(const SweepoutParams& params, int ns, int nt,
                       bool with_equivariance = false);

struct PathSample {
    double r = 0.0; // path parameter
    double s = 0.0, t = 0.0;
    double area = 0.0;
    double volume_fraction = 0.0; // side not containing the north pole
};

struct PathScanResult {
    std::vector<PathSample> samples;
    double half_volume_r = 0.0;
    double area_at_half_volume = 0.0;
    double half_volume_fraction_error = 0.0;
    double max_area = 0.0;
};

// gamma: polyline in [0,1]^2 from the t=0 edge to the t=1 edge.
PathScanResult path_scan(const std::vector<std::pair<double, double>>& gamma,
                         const SweepoutParams& params, int n_samples = 33);

} // namespace fbms
