#include "fbms/sweepout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "fbms/equivariant_builder.hpp"
#include "fbms/numerics.hpp"
#include "fbms/symmetry.hpp"
#include "fbms/volume.hpp"

namespace fbms {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sech(double x) {
    const double ax = std::abs(x);
    return 2.0 * std::exp(-ax) / (1.0 + std::exp(-2.0 * ax));
}

// Monotone family-scaling factor in s: 1 at s=0 exactly, saturating near 15.
double family_gain(double s) {
    if (s >= 1.0) return 15.0;
    const double raw = 1.0 / ((1.0 - s) * (1.0 - s)) - 1.0;
    const double capped = 14.0 * raw / (14.0 + raw);
    return 1.0 + capped;
}

double neck_cap(double t, const SweepoutParams& p) {
    const double blend =
        p.m_low + (p.m_high - p.m_low) * smoothstep3((t - p.blend_lo) / (p.t0 - p.blend_lo));
    // The linear factor collapses the family as t -> 0 (areas go to zero
    // continuously); tanh^2 saturation keeps the near-disc regime intact for
    // moderate t.
    return std::min(blend, p.collapse_slope * t);
}

// Smooth the junction ridge: Jacobi-average the selected vertices, keeping
// exact zeros on symmetry planes and leaving sphere vertices untouched.
void smooth_patch_vertices(FundamentalPatch& patch, const std::vector<int>& region, int passes) {
    std::unordered_map<int, std::vector<int>> nbrs;
    for (const auto& t : patch.triangles)
        for (int e = 0; e < 3; ++e) {
            nbrs[t[e]].push_back(t[(e + 1) % 3]);
            nbrs[t[e]].push_back(t[(e + 2) % 3]);
        }
    for (int pass = 0; pass < passes; ++pass) {
        std::vector<Vec3> updated(region.size());
        for (size_t k = 0; k < region.size(); ++k) {
            const int v = region[k];
            Vec3 avg = Vec3::Zero();
            const auto& nb = nbrs[v];
            for (int w : nb) avg += patch.vertices[w];
            avg /= static_cast<double>(nb.size());
            Vec3 p = 0.5 * (patch.vertices[v] + avg);
            for (int c = 0; c < 3; ++c)
                if (patch.vertices[v][c] == 0.0) p[c] = 0.0;
            updated[k] = p;
        }
        for (size_t k = 0; k < region.size(); ++k) patch.vertices[region[k]] = updated[k];
    }
}

struct RibbonFrame {
    double eps;
    double u_min;                // tube arc parameter where it meets the sphere
    std::vector<double> u;       // K+1 samples from pi down to u_min
    std::vector<double> z;       // junction heights per sample
    std::vector<Vec3> junction;  // 3D junction points (tube coordinates)
};

Vec3 tube_point(double u, double z, double eps) {
    const double R = std::sqrt(1.0 - z * z);
    double y = R * eps * std::sin(u);
    if (u == kPi) y = 0.0;
    return Vec3(R * (1.0 + eps * std::cos(u)), y, z);
}

} // namespace

double sweepout_beta(double s, double t, const SweepoutParams& p) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("sweepout_beta: t outside (0,1)");
    const double alpha = optimal_alpha(t, p.alpha_spec);
    const double m_raw = alpha * t * family_gain(s);
    const double m = soft_cap(m_raw, neck_cap(t, p));
    return m / t;
}

double sweepout_eps(double s, double t, const SweepoutParams& p) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("sweepout_eps: t outside (0,1)");
    const double spec = p.eps0 * s * (1.0 - t) / ((1.0 - t) + p.t0);
    const double m = sweepout_beta(s, t, p) * t;
    const double safe = p.eps_safety * (1.0 - sech(m));
    return soft_cap(spec, safe);
}

TriMesh build_slice(double s, double t, const SweepoutParams& p) {
    if (!(s > 0.0 && s < 1.0) || !(t > 0.0 && t < 1.0))
        throw std::invalid_argument("build_slice: (s,t) must lie in (0,1)^2");
    const double a = sweepout_beta(s, t, p);
    const double eps = sweepout_eps(s, t, p);
    if (eps < 1e-9)
        throw std::runtime_error("build_slice: ribbon width below resolvable scale; "
                                 "increase eps0 or move away from the s=0 edge");
    const int K = p.ribbon_cols;
    const int M = p.rows;
    const int Ncols = p.azimuthal / 4;
    if (K < 4 || M < 4 || Ncols < 4)
        throw std::invalid_argument("build_slice: resolution too coarse; need >= 4 "
                                    "ribbon columns, rows, and azimuthal columns");

    // Normalized profile ratio rho(z) = r(z)/R(z) and the junction equation
    // rho^2 - 1 - eps^2 = 2 eps cos(u) along the tube.
    auto rho = [&](double z) { return profile(a, t, z) / std::sqrt(1.0 - z * z); };
    if (rho(0.0) >= 1.0 - eps)
        throw std::runtime_error("build_slice: annulus waist reaches the ribbon lens");

    RibbonFrame frame;
    frame.eps = eps;
    frame.u_min = std::acos(-0.5 * eps);
    frame.u.resize(K + 1);
    frame.z.resize(K + 1);
    frame.junction.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        const double u = kPi - (kPi - frame.u_min) * k / K;
        frame.u[k] = (k == 0) ? kPi : u;
        if (k == K) {
            frame.z[k] = t;
        } else {
            const double target = std::cos(frame.u[k]);
            auto g = [&](double z) {
                const double q = rho(z);
                return (q * q - 1.0 - eps * eps) / (2.0 * eps) - target;
            };
            double lo = 0.0, hi = t;
            for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) < 0.0 ? lo : hi) = mid;
            }
            frame.z[k] = 0.5 * (lo + hi);
        }
        frame.junction[k] = tube_point(frame.u[k], frame.z[k], eps);
    }

    FundamentalPatch patch;
    auto add_vertex = [&](const Vec3& v, bool sphere) {
        patch.vertices.push_back(v);
        patch.on_sphere.push_back(sphere ? 1 : 0);
        return static_cast<int>(patch.vertices.size()) - 1;
    };

    // Junction vertices (shared ridge).
    std::vector<int> junction_vid(K + 1);
    for (int k = 0; k <= K; ++k) junction_vid[k] = add_vertex(frame.junction[k], k == K);

    // Annulus columns: junction azimuths first, then uniform up to pi/2.
    struct Column {
        double theta;
        double top;  // top height
        int top_vid; // fixed top vertex (junction or sphere ring)
    };
    std::vector<Column> cols;
    for (int k = 0; k <= K; ++k) {
        const double theta = std::atan2(frame.junction[k].y(), frame.junction[k].x());
        cols.push_back({k == 0 ? 0.0 : theta, frame.z[k], junction_vid[k]});
    }
    const double theta_e = cols.back().theta;
    for (int i = 1; i <= Ncols; ++i) {
        const double theta = theta_e + (0.5 * kPi - theta_e) * i / Ncols;
        Column c;
        c.theta = (i == Ncols) ? 0.5 * kPi : theta;
        c.top = t;
        const double r = profile(a, t, t); // = sqrt(1-t^2)
        double x = r * std::cos(c.theta), y = r * std::sin(c.theta);
        if (i == Ncols) x = 0.0;
        c.top_vid = add_vertex(Vec3(x, y, t), true);
        cols.push_back(c);
    }

    const int CA = static_cast<int>(cols.size());
    std::vector<int> agrid(static_cast<size_t>(CA) * (M + 1));
    for (int i = 0; i < CA; ++i) {
        // Columns fan out to uniform azimuths at the waist; packing them at the
        // junction azimuth all the way down would shear the neck into slivers.
        const double theta_uniform = (0.5 * kPi) * i / (CA - 1);
        for (int j = 0; j < M; ++j) {
            const double z = cols[i].top * j / M;
            const double r = profile(a, t, z);
            const double f = static_cast<double>(j) / M;
            const double theta = theta_uniform + (cols[i].theta - theta_uniform) * f * f;
            double x = r * std::cos(theta), y = r * std::sin(theta);
            if (i == 0) y = 0.0;
            if (i == CA - 1) x = 0.0;
            agrid[static_cast<size_t>(i) * (M + 1) + j] = add_vertex(Vec3(x, y, z), false);
        }
        agrid[static_cast<size_t>(i) * (M + 1) + M] = cols[i].top_vid;
    }

    // Ribbon columns from the symmetry plane (u = pi) to the sphere edge.
    std::vector<int> rgrid(static_cast<size_t>(K + 1) * (M + 1));
    for (int k = 0; k <= K; ++k) {
        for (int j = 0; j < M; ++j) {
            const double z = frame.z[k] * j / M;
            rgrid[static_cast<size_t>(k) * (M + 1) + j] =
                add_vertex(tube_point(frame.u[k], z, eps), k == K);
        }
        rgrid[static_cast<size_t>(k) * (M + 1) + M] = junction_vid[k];
    }

    auto quad = [&](int v00, int v10, int v11, int v01) {
        patch.triangles.push_back({v00, v10, v11});
        patch.triangles.push_back({v00, v11, v01});
    };
    for (int i = 0; i + 1 < CA; ++i)
        for (int j = 0; j < M; ++j)
            quad(agrid[static_cast<size_t>(i) * (M + 1) + j],
                 agrid[static_cast<size_t>(i + 1) * (M + 1) + j],
                 agrid[static_cast<size_t>(i + 1) * (M + 1) + j + 1],
                 agrid[static_cast<size_t>(i) * (M + 1) + j + 1]);
    for (int k = 0; k + 1 <= K; ++k)
        for (int j = 0; j < M; ++j)
            quad(rgrid[static_cast<size_t>(k) * (M + 1) + j],
                 rgrid[static_cast<size_t>(k + 1) * (M + 1) + j],
                 rgrid[static_cast<size_t>(k + 1) * (M + 1) + j + 1],
                 rgrid[static_cast<size_t>(k) * (M + 1) + j + 1]);

    orient_consistently(patch);

    if (p.smoothing_passes > 0) {
        // The ridge and its two neighbouring rows on both sheets.
        std::vector<int> region;
        std::unordered_set<int> taken;
        auto take = [&](int v) {
            if (patch.on_sphere[v]) return;
            if (taken.insert(v).second) region.push_back(v);
        };
        for (int k = 0; k <= K; ++k) {
            take(junction_vid[k]);
            for (int j = std::max(0, M - 2); j < M; ++j) {
                take(agrid[static_cast<size_t>(k) * (M + 1) + j]);
                take(rgrid[static_cast<size_t>(k) * (M + 1) + j]);
            }
        }
        smooth_patch_vertices(patch, region, p.smoothing_passes);
    }

    return reflect_signs(patch, 0b111);
}

namespace {

// Area of the s=1 disc-and-ribbons form, used to splice the low-t collapse on
// with a continuous area.
double edge1_disc_form_area(const SweepoutParams& p);

// Low-t completion of the s=1 edge: the family collapses onto an annulus
// about the x2-axis (genus zero, crosses the x1- and x3-axes, disjoint from
// x2), with area matched to the disc form at the t0 seam and going to zero as
// t -> 0.
TriMesh edge1_low_t(double t, const SweepoutParams& p) {
    const double m2 = p.edge1_tube_exponent;
    auto shape = [&](double tt) {
        const double th = std::tanh(neck_cap(tt, p));
        return (1.0 - tt * tt) * th * th;
    };
    const double target = edge1_disc_form_area(p) * shape(t) / shape(p.t0);
    // Solve area(K_{m2/h, h}) = target for h; area decreases to 0 as h -> 1.
    double lo = 0.02, hi = 0.99999;
    if (area_quadrature(m2 / lo, lo) < target)
        throw std::runtime_error("edge1_low_t: target area out of range");
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (area_quadrature(m2 / mid, mid) > target ? lo : hi) = mid;
    }
    const double h2 = 0.5 * (lo + hi);
    return revolve_to_mesh(m2 / h2, h2, p.azimuthal, 2 * p.rows, 1);
}

} // namespace

TriMesh build_edge_slice(int side, double t, const SweepoutParams& p) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("build_edge_slice: t outside (0,1)");
    if (side == 0)
        return revolve_to_mesh(optimal_alpha(t, p.alpha_spec), t, p.azimuthal, 2 * p.rows, 2);
    if (side != 1) throw std::invalid_argument("build_edge_slice: side must be 0 or 1");
    if (t < p.t0) return edge1_low_t(t, p);

    const double eps = sweepout_eps(1.0, t, p);
    const int K = p.ribbon_cols;
    const int M = p.rows;
    const int Ncols = p.azimuthal / 4;
    const int MR = p.rows;
    const double Rt = std::sqrt(1.0 - t * t);
    const double u_min = std::acos(-0.5 * eps);

    FundamentalPatch patch;
    auto add_vertex = [&](const Vec3& v, bool sphere) {
        patch.vertices.push_back(v);
        patch.on_sphere.push_back(sphere ? 1 : 0);
        return static_cast<int>(patch.vertices.size()) - 1;
    };

    // Bite arc: tube cross-section at height t (junction with the disc).
    std::vector<double> u(K + 1);
    std::vector<int> bite_vid(K + 1);
    for (int k = 0; k <= K; ++k) {
        u[k] = (k == 0) ? kPi : kPi - (kPi - u_min) * k / K;
        Vec3 q = tube_point(u[k], t, eps);
        bite_vid[k] = add_vertex(q, k == K);
    }

    // Quarter disc at z = t, outer boundary = bite arc then the spherical rim.
    struct Spoke {
        double phi, rho_out;
        int outer_vid;
    };
    std::vector<Spoke> spokes;
    for (int k = 0; k <= K; ++k) {
        const Vec3& b = patch.vertices[bite_vid[k]];
        spokes.push_back({std::atan2(b.y(), b.x()), std::hypot(b.x(), b.y()), bite_vid[k]});
    }
    const double phi_e = spokes.back().phi;
    for (int i = 1; i <= Ncols; ++i) {
        const double phi = phi_e + (0.5 * kPi - phi_e) * i / Ncols;
        Spoke sp;
        sp.phi = (i == Ncols) ? 0.5 * kPi : phi;
        sp.rho_out = Rt;
        double x = Rt * std::cos(sp.phi), y = Rt * std::sin(sp.phi);
        if (i == Ncols) x = 0.0;
        sp.outer_vid = add_vertex(Vec3(x, y, t), true);
        spokes.push_back(sp);
    }

    const int CD = static_cast<int>(spokes.size());
    const int center = add_vertex(Vec3(0.0, 0.0, t), false);
    std::vector<int> dgrid(static_cast<size_t>(CD) * (MR + 1));
    for (int i = 0; i < CD; ++i) {
        dgrid[static_cast<size_t>(i) * (MR + 1) + 0] = center;
        const double phi_uniform = (0.5 * kPi) * i / (CD - 1);
        for (int j = 1; j < MR; ++j) {
            const double rho = spokes[i].rho_out * j / MR;
            const double f = static_cast<double>(j) / MR;
            const double phi = phi_uniform + (spokes[i].phi - phi_uniform) * f * f;
            double x = rho * std::cos(phi), y = rho * std::sin(phi);
            if (i == 0) y = 0.0;
            if (i == CD - 1) x = 0.0;
            dgrid[static_cast<size_t>(i) * (MR + 1) + j] = add_vertex(Vec3(x, y, t), false);
        }
        dgrid[static_cast<size_t>(i) * (MR + 1) + MR] = spokes[i].outer_vid;
    }

    // Ribbon columns span z in [0, t].
    std::vector<int> rgrid(static_cast<size_t>(K + 1) * (M + 1));
    for (int k = 0; k <= K; ++k) {
        for (int j = 0; j < M; ++j) {
            const double z = t * j / M;
            rgrid[static_cast<size_t>(k) * (M + 1) + j] = add_vertex(tube_point(u[k], z, eps), k == K);
        }
        rgrid[static_cast<size_t>(k) * (M + 1) + M] = bite_vid[k];
    }

    auto quad = [&](int v00, int v10, int v11, int v01) {
        patch.triangles.push_back({v00, v10, v11});
        patch.triangles.push_back({v00, v11, v01});
    };
    for (int i = 0; i + 1 < CD; ++i) {
        patch.triangles.push_back({center, dgrid[static_cast<size_t>(i) * (MR + 1) + 1],
                                   dgrid[static_cast<size_t>(i + 1) * (MR + 1) + 1]});
        for (int j = 1; j < MR; ++j)
            quad(dgrid[static_cast<size_t>(i) * (MR + 1) + j],
                 dgrid[static_cast<size_t>(i + 1) * (MR + 1) + j],
                 dgrid[static_cast<size_t>(i + 1) * (MR + 1) + j + 1],
                 dgrid[static_cast<size_t>(i) * (MR + 1) + j + 1]);
    }
    for (int k = 0; k + 1 <= K; ++k)
        for (int j = 0; j < M; ++j)
            quad(rgrid[static_cast<size_t>(k) * (M + 1) + j],
                 rgrid[static_cast<size_t>(k + 1) * (M + 1) + j],
                 rgrid[static_cast<size_t>(k + 1) * (M + 1) + j + 1],
                 rgrid[static_cast<size_t>(k) * (M + 1) + j + 1]);

    orient_consistently(patch);
    return reflect_signs(patch, 0b111);
}

namespace {
double edge1_disc_form_area(const SweepoutParams& p) {
    return area(build_edge_slice(1, p.t0, p));
}
} // namespace

TriMesh extend_low_t(double s, double t, const SweepoutParams& p) {
    if (!(t > 0.0 && t < p.t0))
        throw std::invalid_argument("extend_low_t: t must lie in (0, t0)");
    return build_slice(s, t, p);
}

SweepoutGrid scan_grid(const SweepoutParams& params, int ns, int nt, bool with_equivariance) {
    if (ns < 8 || nt < 8) throw std::invalid_argument("scan_grid: need ns, nt >= 8");
    SweepoutGrid grid;
    for (int i = 0; i < ns; ++i) grid.s_values.push_back(static_cast<double>(i) / (ns - 1));
    for (int j = 0; j < nt; ++j) grid.t_values.push_back(static_cast<double>(j) / (nt - 1));
    grid.cells.resize(static_cast<size_t>(ns) * nt);

    SymmetryGroup pri2;
    if (with_equivariance) pri2 = prismatic_group(2);

    for (int j = 0; j < nt; ++j) {
        for (int i = 0; i < ns; ++i) {
            SweepoutCell cell;
            cell.s = grid.s_values[i];
            cell.t = grid.t_values[j];
            const bool t_edge = (j == 0 || j == nt - 1);
            if (t_edge) {
                cell.empty = true;
                cell.area = 0.0;
            } else {
                TriMesh mesh;
                try {
                    if (i == 0)
                        mesh = build_edge_slice(0, cell.t, params);
                    else if (i == ns - 1)
                        mesh = build_edge_slice(1, cell.t, params);
                    else
                        mesh = build_slice(cell.s, cell.t, params);
                } catch (const std::exception& e) {
                    throw std::runtime_error("scan_grid cell (s=" + std::to_string(cell.s) +
                                             ", t=" + std::to_string(cell.t) + "): " + e.what());
                }
                cell.area = area(mesh);
                cell.topo = topology(mesh);
                if (with_equivariance) cell.equivariance = equivariance_deviation(mesh, pri2);
                if (cell.area > grid.max_area) {
                    grid.max_area = cell.area;
                    grid.argmax_s = i;
                    grid.argmax_t = j;
                }
            }
            grid.cells[static_cast<size_t>(j) * ns + i] = cell;
        }
    }
    return grid;
}

namespace {

std::pair<double, double> path_point(const std::vector<std::pair<double, double>>& gamma,
                                     double r) {
    if (gamma.size() < 2) throw std::invalid_argument("path needs at least two nodes");
    const double pos = r * (gamma.size() - 1);
    const int seg = std::min(static_cast<int>(pos), static_cast<int>(gamma.size()) - 2);
    const double w = pos - seg;
    return {gamma[seg].first + w * (gamma[seg + 1].first - gamma[seg].first),
            gamma[seg].second + w * (gamma[seg + 1].second - gamma[seg].second)};
}

PathSample evaluate_path_point(const std::vector<std::pair<double, double>>& gamma, double r,
                               const SweepoutParams& params) {
    PathSample sample;
    sample.r = r;
    auto [s, t] = path_point(gamma, r);
    s = std::clamp(s, 0.0, 1.0);
    t = std::clamp(t, 0.0, 1.0);
    sample.s = s;
    sample.t = t;
    if (t <= 0.0 || t >= 1.0) {
        sample.area = 0.0;
        sample.volume_fraction = (t >= 1.0) ? 1.0 : 0.0;
        return sample;
    }
    TriMesh mesh;
    if (s <= 0.0)
        mesh = build_edge_slice(0, t, params);
    else if (s >= 1.0)
        mesh = build_edge_slice(1, t, params);
    else
        mesh = build_slice(s, t, params);
    sample.area = area(mesh);
    const Vec3 near_north(0.0, 0.0, 1.0 - 1e-7);
    sample.volume_fraction = volume_fraction(mesh, near_north);
    return sample;
}

} // namespace

PathScanResult path_scan(const std::vector<std::pair<double, double>>& gamma,
                         const SweepoutParams& params, int n_samples) {
    if (gamma.size() < 2) throw std::invalid_argument("path_scan: path needs >= 2 nodes");
    if (std::abs(gamma.front().second) > 1e-12 || std::abs(gamma.back().second - 1.0) > 1e-12)
        throw std::invalid_argument("path_scan: path must run from the t=0 edge to the t=1 edge");
    if (n_samples < 5) throw std::invalid_argument("path_scan: need at least 5 samples");

    PathScanResult result;
    for (int i = 0; i < n_samples; ++i) {
        const double r = static_cast<double>(i) / (n_samples - 1);
        result.samples.push_back(evaluate_path_point(gamma, r, params));
        result.max_area = std::max(result.max_area, result.samples.back().area);
    }

    // First crossing of volume fraction 1/2.
    int lo_idx = -1;
    for (size_t i = 0; i + 1 < result.samples.size(); ++i) {
        if ((result.samples[i].volume_fraction - 0.5) *
                (result.samples[i + 1].volume_fraction - 0.5) <=
            0.0) {
            lo_idx = static_cast<int>(i);
            break;
        }
    }
    if (lo_idx < 0)
        throw std::runtime_error("path_scan: volume fraction never crosses 1/2; "
                                 "refine the sampling");

    double lo = result.samples[lo_idx].r, hi = result.samples[lo_idx + 1].r;
    double f_lo = result.samples[lo_idx].volume_fraction - 0.5;
    PathSample best = (std::abs(f_lo) < std::abs(result.samples[lo_idx + 1].volume_fraction - 0.5))
                          ? result.samples[lo_idx]
                          : result.samples[lo_idx + 1];
    for (int it = 0; it < 60; ++it) {
        if (std::abs(best.volume_fraction - 0.5) <= 1e-4 || hi - lo < 1e-12) break;
        const double mid = 0.5 * (lo + hi);
        const PathSample sample = evaluate_path_point(gamma, mid, params);
        if (std::abs(sample.volume_fraction - 0.5) < std::abs(best.volume_fraction - 0.5))
            best = sample;
        if ((sample.volume_fraction - 0.5) * f_lo <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            f_lo = sample.volume_fraction - 0.5;
        }
    }
    result.half_volume_r = best.r;
    result.area_at_half_volume = best.area;
    result.half_volume_fraction_error = std::abs(best.volume_fraction - 0.5);
    return result;
}

} // namespace fbms
