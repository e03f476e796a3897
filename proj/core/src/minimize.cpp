#include "fbms/minimize.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "fbms/eigs.hpp"
#include "fbms/spectra.hpp"

namespace fbms {

namespace {

Eigen::VectorXd vertex_mass(const TriMesh& mesh) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (const auto& t : mesh.triangles) {
        const double a = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                       mesh.vertices[t[2]]) / 3.0;
        for (int k = 0; k < 3; ++k) m[t[k]] += a;
    }
    return m;
}

} // namespace

std::vector<Vec3> area_gradient_raw(const TriMesh& mesh) {
    std::vector<Vec3> grad(mesh.vertices.size(), Vec3::Zero());
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        Vec3 n = (b - a).cross(c - a);
        const double len = n.norm();
        if (len < 1e-300) continue; // degenerate triangle: clamp contribution
        n /= len;
        grad[t[0]] += 0.5 * (b - c).cross(n);
        grad[t[1]] += 0.5 * (c - a).cross(n);
        grad[t[2]] += 0.5 * (a - b).cross(n);
    }
    return grad;
}

std::vector<Vec3> area_gradient(const TriMesh& mesh) {
    std::vector<Vec3> grad = area_gradient_raw(mesh);
    if (!mesh.on_sphere.empty()) {
        for (int v = 0; v < mesh.vertex_count(); ++v) {
            if (!mesh.on_sphere[v]) continue;
            const Vec3 radial = mesh.vertices[v].normalized();
            grad[v] -= grad[v].dot(radial) * radial;
        }
    }
    return grad;
}

double boundary_orthogonality_residual(const TriMesh& mesh) {
    if (mesh.on_sphere.empty() ||
        std::none_of(mesh.on_sphere.begin(), mesh.on_sphere.end(), [](auto f) { return f != 0; }))
        throw std::invalid_argument("boundary_orthogonality_residual: mesh has no boundary");
    const auto grad = area_gradient_raw(mesh);
    double scale = 0.0;
    for (const auto& g : grad) scale = std::max(scale, g.norm());
    double worst = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (!mesh.on_sphere[v]) continue;
        const double len = grad[v].norm();
        if (len < 1e-9 * scale) continue;
        const Vec3 radial = mesh.vertices[v].normalized();
        const double c = std::clamp(grad[v].dot(radial) / len, -1.0, 1.0);
        worst = std::max(worst, std::acos(c));
    }
    return worst;
}

double min_triangle_quality(const TriMesh& mesh) {
    double worst = 1.0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        const double l2 = (b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm();
        if (l2 == 0.0) return 0.0;
        worst = std::min(worst, 4.0 * std::sqrt(3.0) * triangle_area(a, b, c) / l2);
    }
    return worst;
}

namespace {

Eigen::VectorXd flatten(const std::vector<Vec3>& v) {
    Eigen::VectorXd out(3 * v.size());
    for (size_t i = 0; i < v.size(); ++i) out.segment<3>(3 * static_cast<int>(i)) = v[i];
    return out;
}

// Positions += eta * direction, boundary snapped back to the sphere.
void apply_step(TriMesh& mesh, const Eigen::VectorXd& direction, double eta) {
    for (int v = 0; v < mesh.vertex_count(); ++v)
        mesh.vertices[v] += eta * direction.segment<3>(3 * v);
    if (!mesh.on_sphere.empty())
        for (int v = 0; v < mesh.vertex_count(); ++v)
            if (mesh.on_sphere[v]) mesh.vertices[v].normalize();
}

// The flow moves every vertex along a single direction: interior vertices
// along the surface normal, boundary vertices along the in-sphere direction
// perpendicular to the boundary curve. Tangential sliding is parametrization
// gauge; leaving it free fills the discrete Hessian with large negative
// "zigzag" modes that have no continuum meaning.
struct FlowContext {
    const SymmetryGroup& group;
    std::vector<int> boundary_next, boundary_prev;
};

std::vector<Vec3> motion_axes(const TriMesh& mesh, const FlowContext& ctx) {
    std::vector<Vec3> axes = vertex_normals(mesh);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.on_sphere.empty() || !mesh.on_sphere[v]) continue;
        const Vec3 radial = mesh.vertices[v].normalized();
        Vec3 axis;
        if (ctx.boundary_next[v] >= 0 && ctx.boundary_prev[v] >= 0) {
            const Vec3 rim =
                mesh.vertices[ctx.boundary_next[v]] - mesh.vertices[ctx.boundary_prev[v]];
            axis = radial.cross(rim);
        } else {
            axis = axes[v] - axes[v].dot(radial) * radial;
        }
        const double len = axis.norm();
        if (len > 1e-12)
            axes[v] = axis / len;
        else
            axes[v] = (axes[v] - axes[v].dot(radial) * radial).normalized();
    }
    return axes;
}

Eigen::VectorXd project_motion(const std::vector<Vec3>& axes, const std::vector<Vec3>& field) {
    Eigen::VectorXd out(3 * field.size());
    for (size_t v = 0; v < field.size(); ++v) {
        const Vec3& e = axes[v];
        out.segment<3>(3 * static_cast<int>(v)) = field[v].dot(e) * e;
    }
    return out;
}

Eigen::VectorXd constrained_gradient(const TriMesh& X, const FlowContext& ctx) {
    TriMesh Y = project_equivariant(X, ctx.group);
    return project_motion(motion_axes(Y, ctx), area_gradient(Y));
}

// Directional second difference of the constrained gradient.
Eigen::VectorXd hessian_apply(const TriMesh& X, const FlowContext& ctx,
                              const Eigen::VectorXd& v) {
    double dmax = 0.0;
    for (int i = 0; i < X.vertex_count(); ++i)
        dmax = std::max(dmax, v.segment<3>(3 * i).norm());
    if (dmax == 0.0) return Eigen::VectorXd::Zero(v.size());
    const double eps = 1e-6 / dmax;
    TriMesh plus = X, minus = X;
    apply_step(plus, v, eps);
    apply_step(minus, v, -eps);
    return (constrained_gradient(plus, ctx) - constrained_gradient(minus, ctx)) / (2.0 * eps);
}

// Sobolev preconditioner P = S + sigma M applied per coordinate; spectrally
// equivalent to the area Hessian, so preconditioned descent converges at a
// mesh-independent rate.
class SobolevOp {
public:
    SobolevOp(const TriMesh& mesh, double sigma) {
        JacobiAssembly ja = assemble_jacobi(mesh);
        SparseMat P = ja.stiffness;
        const int n = mesh.vertex_count();
        std::vector<Eigen::Triplet<double>> trip;
        for (int i = 0; i < n; ++i) trip.emplace_back(i, i, sigma * ja.mass[i]);
        SparseMat shift(n, n);
        shift.setFromTriplets(trip.begin(), trip.end());
        P = P + shift;
        P.makeCompressed();
        llt_.compute(P);
        ok_ = llt_.info() == Eigen::Success;
        matrix_ = P;
    }
    bool ok() const { return ok_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs3) const {
        const int n = static_cast<int>(rhs3.size()) / 3;
        Eigen::VectorXd out(rhs3.size());
        Eigen::VectorXd comp(n);
        for (int c = 0; c < 3; ++c) {
            for (int v = 0; v < n; ++v) comp[v] = rhs3[3 * v + c];
            const Eigen::VectorXd x = llt_.solve(comp);
            for (int v = 0; v < n; ++v) out[3 * v + c] = x[v];
        }
        return out;
    }

    double dot(const Eigen::VectorXd& a3, const Eigen::VectorXd& b3) const {
        const int n = static_cast<int>(a3.size()) / 3;
        Eigen::VectorXd ca(n), cb(n);
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
            for (int v = 0; v < n; ++v) {
                ca[v] = a3[3 * v + c];
                cb[v] = b3[3 * v + c];
            }
            acc += ca.dot(matrix_ * cb);
        }
        return acc;
    }

private:
    Eigen::SimplicialLLT<SparseMat> llt_;
    SparseMat matrix_;
    bool ok_ = false;
};

// Lowest Ritz pairs of the pencil (Hessian, P) by Lanczos on P^{-1} H in the
// P inner product. With the Sobolev metric the spectrum is O(1) wide, so a
// short recurrence resolves the bottom cluster accurately.
struct PencilModes {
    std::vector<double> theta;
    std::vector<Eigen::VectorXd> w; // P-orthonormal
    int negatives = 0;
};

PencilModes pencil_modes(const TriMesh& X, const FlowContext& ctx, const SobolevOp& P,
                         const Eigen::VectorXd& seed, int steps, int keep) {
    PencilModes out;
    const int dim = 3 * X.vertex_count();
    steps = std::min(steps, dim);
    Eigen::MatrixXd V(dim, steps + 1);
    Eigen::VectorXd alpha(steps), beta(steps);
    Eigen::VectorXd v0 = seed;
    double nv0 = std::sqrt(P.dot(v0, v0));
    if (nv0 < 1e-30) return out;
    V.col(0) = v0 / nv0;
    int m = 0;
    for (int j = 0; j < steps; ++j) {
        Eigen::VectorXd w = P.solve(hessian_apply(X, ctx, V.col(j)));
        alpha[j] = P.dot(w, V.col(j));
        w -= alpha[j] * V.col(j);
        if (j > 0) w -= beta[j - 1] * V.col(j - 1);
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i) w -= P.dot(w, V.col(i)) * V.col(i);
        beta[j] = std::sqrt(std::max(0.0, P.dot(w, w)));
        m = j + 1;
        if (beta[j] < 1e-11) break;
        V.col(j + 1) = w / beta[j];
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    double span = 1e-12;
    for (int i = 0; i < m; ++i) span = std::max(span, std::abs(es.eigenvalues()[i]));
    const int take = std::min(keep, m);
    for (int i = 0; i < take; ++i) {
        // Ritz residual bound |beta_m * s_{m,i}|: the merit-checked band
        // tolerates rough pairs, the reported negative count does not.
        const double bound = std::abs(beta[m - 1] * es.eigenvectors()(m - 1, i));
        const double theta = es.eigenvalues()[i];
        out.theta.push_back(theta);
        out.w.push_back(V.leftCols(m) * es.eigenvectors().col(i));
        if (theta < 0.0 && bound <= std::max(0.05 * std::abs(theta), 1e-4 * span))
            ++out.negatives;
    }
    return out;
}

// Tangential redistribution pass: interior vertices relax toward their
// neighbour centroid within the tangent plane, boundary vertices re-equalize
// along the rim. Leaves the surface unchanged to first order.
void tangential_smooth(TriMesh& mesh, const FlowContext& ctx,
                       const std::vector<std::vector<int>>& neighbours, double weight) {
    const auto normals = vertex_normals(mesh);
    std::vector<Vec3> updated = mesh.vertices;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const bool boundary = !mesh.on_sphere.empty() && mesh.on_sphere[v];
        if (boundary) {
            const int nxt = ctx.boundary_next[v], prv = ctx.boundary_prev[v];
            if (nxt < 0 || prv < 0) continue;
            const Vec3 mid = 0.5 * (mesh.vertices[nxt] + mesh.vertices[prv]);
            Vec3 rim = mesh.vertices[nxt] - mesh.vertices[prv];
            const double len = rim.norm();
            if (len < 1e-14) continue;
            rim /= len;
            Vec3 p = mesh.vertices[v] + weight * (mid - mesh.vertices[v]).dot(rim) * rim;
            updated[v] = p.normalized();
        } else {
            const auto& nb = neighbours[v];
            if (nb.empty()) continue;
            Vec3 centroid = Vec3::Zero();
            for (int w : nb) centroid += mesh.vertices[w];
            centroid /= static_cast<double>(nb.size());
            Vec3 d = centroid - mesh.vertices[v];
            d -= d.dot(normals[v]) * normals[v];
            updated[v] = mesh.vertices[v] + weight * d;
        }
    }
    mesh.vertices = std::move(updated);
}

} // namespace

std::pair<TriMesh, FlowReport> minimize(const TriMesh& start, const FlowOptions& opts) {
    if (opts.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(opts.grad_tol_rel > 0.0)) throw std::invalid_argument("gradient threshold must be > 0");
    if (!start.has_orbit_labels())
        throw std::invalid_argument("minimize: input mesh must carry orbit labels "
                                    "(use the equivariant constructors)");
    const SymmetryGroup group =
        opts.group.elements.empty() ? prismatic_group(2) : opts.group;

    TriMesh X = project_equivariant(start, group);
    FlowReport report;
    report.area_history.reserve(256);

    FlowContext ctx{group, {}, {}};
    ctx.boundary_next.assign(X.vertex_count(), -1);
    ctx.boundary_prev.assign(X.vertex_count(), -1);
    for (const auto& loop : boundary_loops(X)) {
        const int L = static_cast<int>(loop.size());
        for (int i = 0; i < L; ++i) {
            ctx.boundary_next[loop[i]] = loop[(i + 1) % L];
            ctx.boundary_prev[loop[i]] = loop[(i + L - 1) % L];
        }
    }
    std::vector<std::vector<int>> neighbours(X.vertex_count());
    for (const auto& t : X.triangles)
        for (int e = 0; e < 3; ++e) {
            neighbours[t[e]].push_back(t[(e + 1) % 3]);
            neighbours[t[e]].push_back(t[(e + 2) % 3]);
        }
    for (auto& list : neighbours) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    std::unique_ptr<SobolevOp> P;
    PencilModes modes;
    int preconditioner_age = 1 << 20;
    int modes_age = 1 << 20;
    bool modes_fresh = false;
    double eta_descent = (opts.step_rule == StepRule::Fixed) ? opts.fixed_step : 1.0;
    double eta_newton = 1.0;
    const int lanczos_steps = 90;
    const int newton_band = 24;
    const double newton_gate_rel = 0.05; // engage the eigenband when ||g|| < gate * area
    int accepted_steps = 0;
    const int refresh_cadence = std::max(opts.mode_refresh, 1);

    auto refresh_preconditioner = [&]() {
        P = std::make_unique<SobolevOp>(X, 1.0);
        if (!P->ok()) throw std::runtime_error("minimize: preconditioner factorization failed");
        preconditioner_age = 0;
    };
    auto refresh_modes = [&](const Eigen::VectorXd& g) {
        if (preconditioner_age > 0) refresh_preconditioner();
        modes = pencil_modes(X, ctx, *P, P->solve(g), lanczos_steps, newton_band);
        report.unstable_modes_used = modes.negatives;
        modes_age = 0;
        modes_fresh = true;
    };

    // One backtracking line search; returns true when a step was taken.
    auto try_step = [&](const Eigen::VectorXd& direction, bool newton_like,
                        const Eigen::VectorXd& g, double merit0, int iter, double& eta) {
        std::vector<double> local_edge(X.vertex_count(),
                                       std::numeric_limits<double>::infinity());
        for (const auto& t : X.triangles)
            for (int e = 0; e < 3; ++e) {
                const double len = (X.vertices[t[e]] - X.vertices[t[(e + 1) % 3]]).norm();
                local_edge[t[e]] = std::min(local_edge[t[e]], len);
                local_edge[t[(e + 1) % 3]] = std::min(local_edge[t[(e + 1) % 3]], len);
            }
        double rate = 0.0;
        for (int v = 0; v < X.vertex_count(); ++v) {
            const double dv = direction.segment<3>(3 * v).norm();
            if (dv > 0.0 && local_edge[v] > 0.0) rate = std::max(rate, dv / local_edge[v]);
        }
        if (rate == 0.0) return true;
        const double eta_cap = std::min(1.0, 0.25 / rate);
        if (opts.step_rule == StepRule::Backtracking)
            eta = newton_like ? eta_cap : std::min(2.0 * eta, eta_cap);
        for (int back = 0; back < 45; ++back) {
            TriMesh trial = X;
            apply_step(trial, direction, eta);
            if ((iter % std::max(opts.projection_cadence, 1)) == 0)
                trial = project_equivariant(trial, group);
            if (min_triangle_quality(trial) < opts.quality_floor) {
                if (opts.step_rule == StepRule::Fixed) return false;
                eta *= 0.5;
                continue;
            }
            const double merit =
                newton_like ? constrained_gradient(trial, ctx).norm() : area(trial);
            const bool ok = (opts.step_rule == StepRule::Fixed) ||
                            (newton_like ? merit < merit0
                                         : merit < merit0 + 1e-4 * eta * g.dot(direction));
            if (ok) {
                X = std::move(trial);
                ++accepted_steps;
                return true;
            }
            eta *= 0.5;
            if (eta < 1e-16) return false;
        }
        return false;
    };

    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const double A = area(X);
        report.area_history.push_back(A);
        Eigen::VectorXd g = constrained_gradient(X, ctx);
        const double gnorm = g.norm();
        report.final_gradient_norm = gnorm;
        if (gnorm < opts.grad_tol_rel * A) {
            report.converged = true;
            break;
        }

        const bool smoothing_active =
            opts.smooth_every > 0 && gnorm > 50.0 * opts.grad_tol_rel * A;
        if (smoothing_active && accepted_steps > 0 && accepted_steps % opts.smooth_every == 0) {
            tangential_smooth(X, ctx, neighbours, opts.smooth_weight);
            X = project_equivariant(X, group);
            ++accepted_steps;
            g = constrained_gradient(X, ctx);
        }

        if (P == nullptr || preconditioner_age >= refresh_cadence) refresh_preconditioner();
        ++preconditioner_age;

        const bool want_newton =
            opts.mode_refresh > 0 && gnorm < newton_gate_rel * A;
        if (want_newton && modes_age >= refresh_cadence) refresh_modes(g);
        ++modes_age;

        bool accepted = false;
        if (want_newton && !modes.w.empty()) {
            // Newton in the resolved eigenband (ascends negative curvature),
            // preconditioned descent on the remainder.
            for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
                Eigen::VectorXd r = P->solve(g);
                Eigen::VectorXd direction = Eigen::VectorXd::Zero(g.size());
                const double theta_floor = 0.05;
                for (size_t k = 0; k < modes.w.size(); ++k) {
                    const double c = g.dot(modes.w[k]);
                    r -= c * modes.w[k];
                    double th = modes.theta[k];
                    if (std::abs(th) < theta_floor) th = (th < 0.0 ? -1.0 : 1.0) * theta_floor;
                    direction -= (c / th) * modes.w[k];
                }
                direction -= r;
                accepted = try_step(direction, true, g, gnorm, iter, eta_newton);
                if (!accepted && !modes_fresh) {
                    refresh_modes(g);
                    continue;
                }
                break;
            }
        }
        if (!accepted) {
            const Eigen::VectorXd direction = -P->solve(g);
            accepted = try_step(direction, false, g, A, iter, eta_descent);
        }
        modes_fresh = false;
        if (!accepted) {
            if (min_triangle_quality(X) < opts.quality_floor)
                report.aborted_degenerate = true;
            else
                report.aborted_line_search = true;
            break;
        }
    }

    report.iterations = iter;
    report.final_area = area(X);
    report.final_gradient_norm = constrained_gradient(X, ctx).norm();
    if (report.final_gradient_norm < opts.grad_tol_rel * report.final_area)
        report.converged = true;
    report.boundary_orthogonality = boundary_orthogonality_residual(X);
    report.topology = topology(X);
    for (size_t i = 0; i + 1 < report.area_history.size(); ++i)
        if (report.area_history[i + 1] > report.area_history[i] + 1e-12)
            report.area_monotone = false;
    return {X, report};
}

} // namespace fbms
