#include "fbms/spectra.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace fbms {

namespace {

SparseMat cotan_stiffness(const TriMesh& mesh) {
    const int n = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.triangles.size() * 12);
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        const double area2 = (b - a).cross(c - a).norm();
        if (area2 < 1e-300) continue;
        // Cotangent of the angle at each corner.
        auto corner = [&](const Vec3& apex, const Vec3& p, const Vec3& q) {
            const Vec3 u = p - apex, v = q - apex;
            return u.dot(v) / u.cross(v).norm();
        };
        const double cot_a = corner(a, b, c);
        const double cot_b = corner(b, c, a);
        const double cot_c = corner(c, a, b);
        auto add = [&](int i, int j, double w) {
            trip.emplace_back(i, j, -w);
            trip.emplace_back(j, i, -w);
            trip.emplace_back(i, i, w);
            trip.emplace_back(j, j, w);
        };
        add(t[1], t[2], 0.5 * cot_a);
        add(t[2], t[0], 0.5 * cot_b);
        add(t[0], t[1], 0.5 * cot_c);
    }
    SparseMat S(n, n);
    S.setFromTriplets(trip.begin(), trip.end());
    S.makeCompressed();
    return S;
}

Eigen::VectorXd lumped_mass(const TriMesh& mesh) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (const auto& t : mesh.triangles) {
        const double a = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]],
                                       mesh.vertices[t[2]]) / 3.0;
        for (int k = 0; k < 3; ++k) m[t[k]] += a;
    }
    return m;
}

} // namespace

SurfaceJets osculating_jets(const TriMesh& mesh) {
    const int n = mesh.vertex_count();
    SurfaceJets jets;
    jets.a2 = Eigen::VectorXd::Zero(n);
    jets.normals = vertex_normals(mesh);
    // Vertex adjacency.
    std::vector<std::vector<int>> nbr(n);
    for (const auto& t : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            nbr[t[e]].push_back(t[(e + 1) % 3]);
            nbr[t[e]].push_back(t[(e + 2) % 3]);
        }
    for (auto& list : nbr) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    std::vector<int> ring;
    std::unordered_set<int> seen;
    for (int v = 0; v < n; ++v) {
        const Vec3 nv = jets.normals[v];
        if (nv.norm() < 0.5) continue;
        // Tangent frame around the crude normal.
        Vec3 e1 = (std::abs(nv.x()) < 0.9) ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
        e1 = (e1 - e1.dot(nv) * nv).normalized();
        const Vec3 e2 = nv.cross(e1);

        ring.clear();
        seen.clear();
        seen.insert(v);
        for (int w : nbr[v])
            if (seen.insert(w).second) ring.push_back(w);
        const size_t one_ring = ring.size();
        for (size_t i = 0; i < one_ring; ++i)
            for (int w : nbr[ring[i]])
                if (seen.insert(w).second) ring.push_back(w);

        if (ring.size() < 6) continue;
        Eigen::MatrixXd X(ring.size(), 6);
        Eigen::VectorXd rhs(ring.size());
        for (size_t i = 0; i < ring.size(); ++i) {
            const Vec3 d = mesh.vertices[ring[i]] - mesh.vertices[v];
            const double xi = d.dot(e1), eta = d.dot(e2);
            X(i, 0) = 1.0;
            X(i, 1) = xi;
            X(i, 2) = eta;
            X(i, 3) = 0.5 * xi * xi;
            X(i, 4) = xi * eta;
            X(i, 5) = 0.5 * eta * eta;
            rhs[i] = d.dot(nv);
        }
        const Eigen::VectorXd c = X.colPivHouseholderQr().solve(rhs);
        const double gx = c[1], gy = c[2];
        const double w2 = 1.0 + gx * gx + gy * gy;
        Eigen::Matrix2d I;
        I << 1.0 + gx * gx, gx * gy, gx * gy, 1.0 + gy * gy;
        Eigen::Matrix2d II;
        II << c[3], c[4], c[4], c[5];
        II /= std::sqrt(w2);
        const Eigen::Matrix2d S = I.inverse() * II;
        jets.a2[v] = S(0, 0) * S(0, 0) + S(1, 1) * S(1, 1) + 2.0 * S(0, 1) * S(1, 0);
        // The fitted linear terms tilt the crude normal to second order.
        Vec3 corrected = nv - gx * e1 - gy * e2;
        const double len = corrected.norm();
        if (len > 0.0) jets.normals[v] = corrected / len;
    }
    return jets;
}

Eigen::VectorXd shape_operator_norm_squared(const TriMesh& mesh) {
    return osculating_jets(mesh).a2;
}

JacobiAssembly assemble_jacobi(const TriMesh& mesh) {
    JacobiAssembly ja;
    const int n = mesh.vertex_count();
    ja.stiffness = cotan_stiffness(mesh);
    ja.mass = lumped_mass(mesh);
    ja.potential = shape_operator_norm_squared(mesh);
    ja.is_boundary.assign(n, 0);

    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& loop : boundary_loops(mesh)) {
        for (size_t i = 0; i < loop.size(); ++i) {
            const int a = loop[i], b = loop[(i + 1) % loop.size()];
            const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
            // Consistent P1 edge mass: exact for piecewise-linear integrands.
            trip.emplace_back(a, a, len / 3.0);
            trip.emplace_back(b, b, len / 3.0);
            trip.emplace_back(a, b, len / 6.0);
            trip.emplace_back(b, a, len / 6.0);
            ja.is_boundary[a] = 1;
        }
        for (int v : loop) ja.boundary_vertices.push_back(v);
    }
    ja.boundary_mass.resize(n, n);
    ja.boundary_mass.setFromTriplets(trip.begin(), trip.end());
    ja.boundary_mass.makeCompressed();
    return ja;
}

namespace {

// Jacobi operator matrix for the Robin problem.
SparseMat robin_operator(const JacobiAssembly& ja) {
    const int n = static_cast<int>(ja.mass.size());
    SparseMat P(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n);
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, ja.mass[i] * ja.potential[i]);
    P.setFromTriplets(trip.begin(), trip.end());
    return SparseMat(ja.stiffness - P - ja.boundary_coefficient * ja.boundary_mass);
}

// Restrict a sparse operator and diagonal mass to the selected dofs.
void restrict_dofs(const SparseMat& A, const Eigen::VectorXd& m, const std::vector<int>& keep,
                   SparseMat& A_out, Eigen::VectorXd& m_out) {
    const int n = static_cast<int>(A.rows());
    std::vector<int> where(n, -1);
    for (size_t i = 0; i < keep.size(); ++i) where[keep[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < A.outerSize(); ++col)
        for (SparseMat::InnerIterator it(A, col); it; ++it)
            if (where[it.row()] >= 0 && where[it.col()] >= 0)
                trip.emplace_back(where[it.row()], where[it.col()], it.value());
    A_out.resize(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
    A_out.setFromTriplets(trip.begin(), trip.end());
    m_out.resize(static_cast<int>(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i) m_out[static_cast<int>(i)] = m[keep[i]];
}

int count_negative(const std::vector<double>& values, double cutoff) {
    int count = 0;
    for (double v : values)
        if (v < -cutoff) ++count;
    return count;
}

} // namespace

SparseMat equivariant_basis(const TriMesh& mesh, const SymmetryGroup& group) {
    if (!mesh.has_orbit_labels())
        throw std::invalid_argument("equivariant_basis: mesh has no orbit labels");
    // Element sign masks and their characters.
    std::vector<std::uint8_t> masks;
    std::vector<int> sgn;
    for (const auto& g : group.elements) {
        std::uint8_t mask = 0;
        for (int k = 0; k < 3; ++k) {
            if (std::abs(g(k, k) + 1.0) < 1e-12) mask |= static_cast<std::uint8_t>(1u << k);
            for (int c = 0; c < 3; ++c)
                if (c != k && std::abs(g(k, c)) > 1e-12)
                    throw std::invalid_argument(
                        "equivariant_basis: group must consist of coordinate sign flips");
        }
        masks.push_back(mask);
        sgn.push_back(sign_character(g, mesh));
    }
    int sgn_by_mask[8];
    std::fill(std::begin(sgn_by_mask), std::end(sgn_by_mask), 0);
    for (size_t i = 0; i < masks.size(); ++i) sgn_by_mask[masks[i]] = sgn[i];

    const int n = mesh.vertex_count();
    std::vector<std::vector<int>> members(n);
    for (int v = 0; v < n; ++v) members[mesh.orbit_rep[v]].push_back(v);

    std::vector<Eigen::Triplet<double>> trip;
    int col = 0;
    for (int r = 0; r < n; ++r) {
        if (members[r].empty()) continue;
        std::uint8_t active = 0;
        for (int k = 0; k < 3; ++k)
            if (std::abs(mesh.vertices[r][k]) > 0.0) active |= static_cast<std::uint8_t>(1u << k);
        // Stabilizer characters must all be +1, else the orbit carries no
        // equivariant function.
        bool admissible = true;
        for (std::uint8_t m : masks)
            if ((m & active) == 0 && sgn_by_mask[m] < 0) admissible = false;
        if (!admissible) continue;
        bool defined = true;
        for (int v : members[r]) {
            int chi = 0;
            for (std::uint8_t m : masks)
                if ((m & active) == (mesh.orbit_sign[v] & active)) {
                    chi = sgn_by_mask[m];
                    break;
                }
            if (chi == 0) {
                defined = false; // orbit not reachable by this group; skip
                break;
            }
            trip.emplace_back(v, col, static_cast<double>(chi));
        }
        if (!defined) {
            // Drop triplets of this column.
            while (!trip.empty() && trip.back().col() == col) trip.pop_back();
            continue;
        }
        ++col;
    }
    SparseMat Z(n, col);
    Z.setFromTriplets(trip.begin(), trip.end());
    Z.makeCompressed();
    return Z;
}

SpectrumReport steklov_spectrum(const TriMesh& mesh, int k, const Tolerances& tol) {
    JacobiAssembly ja = assemble_jacobi(mesh);
    const int n = mesh.vertex_count();
    if (ja.boundary_vertices.empty())
        throw std::invalid_argument("steklov_spectrum: mesh has no boundary");
    std::vector<int> boundary = ja.boundary_vertices;
    std::sort(boundary.begin(), boundary.end());
    std::vector<int> interior;
    for (int v = 0; v < n; ++v)
        if (!ja.is_boundary[v]) interior.push_back(v);

    const int nb = static_cast<int>(boundary.size());
    std::vector<int> bpos(n, -1);
    for (int i = 0; i < nb; ++i) bpos[boundary[i]] = i;

    // Dense Dirichlet-to-Neumann map on the boundary dofs.
    Eigen::MatrixXd dtn(nb, nb);
    if (interior.empty()) {
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) dtn(i, j) = ja.stiffness.coeff(boundary[i], boundary[j]);
    } else {
        SparseMat S_II;
        Eigen::VectorXd unused;
        restrict_dofs(ja.stiffness, ja.mass, interior, S_II, unused);
        Eigen::SimplicialLLT<SparseMat> llt(S_II);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("steklov_spectrum: interior stiffness factorization failed");
        std::vector<int> ipos(n, -1);
        for (size_t i = 0; i < interior.size(); ++i) ipos[interior[i]] = static_cast<int>(i);
        Eigen::MatrixXd S_IB = Eigen::MatrixXd::Zero(static_cast<int>(interior.size()), nb);
        Eigen::MatrixXd S_BB = Eigen::MatrixXd::Zero(nb, nb);
        for (int col = 0; col < ja.stiffness.outerSize(); ++col)
            for (SparseMat::InnerIterator it(ja.stiffness, col); it; ++it) {
                const int r = static_cast<int>(it.row()), c = col;
                if (ipos[r] >= 0 && bpos[c] >= 0) S_IB(ipos[r], bpos[c]) = it.value();
                if (bpos[r] >= 0 && bpos[c] >= 0) S_BB(bpos[r], bpos[c]) = it.value();
            }
        const Eigen::MatrixXd X = llt.solve(S_IB);
        dtn = S_BB - S_IB.transpose() * X;
    }

    // Boundary mass block (consistent, SPD on the loops).
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nb, nb);
    for (int col = 0; col < ja.boundary_mass.outerSize(); ++col)
        for (SparseMat::InnerIterator it(ja.boundary_mass, col); it; ++it)
            if (bpos[it.row()] >= 0 && bpos[col] >= 0)
                B(bpos[it.row()], bpos[col]) = it.value();

    Eigen::LLT<Eigen::MatrixXd> bllt(B);
    if (bllt.info() != Eigen::Success)
        throw std::runtime_error("steklov_spectrum: boundary mass not positive definite");
    const Eigen::MatrixXd L = bllt.matrixL();
    Eigen::MatrixXd C = L.triangularView<Eigen::Lower>().solve(dtn);
    C = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd(C.transpose()));
    C = 0.5 * (C + C.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw std::runtime_error("steklov eigensolve failed");

    SpectrumReport report;
    report.problem = "steklov";
    report.subspace = "full";
    k = std::min(k, nb);
    report.eigenfunctions = Eigen::MatrixXd::Zero(n, k);

    Eigen::SimplicialLLT<SparseMat> interior_llt;
    SparseMat S_II;
    Eigen::MatrixXd S_IB;
    std::vector<int> ipos(n, -1);
    if (!interior.empty()) {
        Eigen::VectorXd unused;
        restrict_dofs(ja.stiffness, ja.mass, interior, S_II, unused);
        interior_llt.compute(S_II);
        for (size_t i = 0; i < interior.size(); ++i) ipos[interior[i]] = static_cast<int>(i);
        S_IB = Eigen::MatrixXd::Zero(static_cast<int>(interior.size()), nb);
        for (int col = 0; col < ja.stiffness.outerSize(); ++col)
            for (SparseMat::InnerIterator it(ja.stiffness, col); it; ++it)
                if (ipos[it.row()] >= 0 && bpos[col] >= 0)
                    S_IB(ipos[it.row()], bpos[col]) = it.value();
    }
    double max_res = 0.0;
    for (int i = 0; i < k; ++i) {
        report.eigenvalues.push_back(es.eigenvalues()[i]);
        Eigen::VectorXd ub =
            L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(i));
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < nb; ++j) full[boundary[j]] = ub[j];
        if (!interior.empty()) {
            const Eigen::VectorXd ui = interior_llt.solve(-S_IB * ub);
            for (size_t j = 0; j < interior.size(); ++j) full[interior[j]] = ui[j];
        }
        report.eigenfunctions.col(i) = full;
        // Residual of the generalized problem S u = sigma B u.
        Eigen::VectorXd r = ja.stiffness * full -
                            es.eigenvalues()[i] * (ja.boundary_mass * full);
        max_res = std::max(max_res, r.norm());
    }
    report.max_residual = max_res;
    double scale = 0.0;
    for (double v : report.eigenvalues) scale = std::max(scale, std::abs(v));
    report.index_cutoff = tol.index_rel * std::max(scale, 1.0);
    report.negative_count = count_negative(report.eigenvalues, report.index_cutoff);
    return report;
}

SpectrumReport jacobi_spectrum(const TriMesh& mesh, JacobiBoundaryCondition bc, int k,
                               const std::optional<SymmetryGroup>& equivariant_group,
                               const Tolerances& tol) {
    TopologySummary topo = topology(mesh);
    if (!topo.orientable) throw std::invalid_argument("jacobi_spectrum: mesh not orientable");
    JacobiAssembly ja = assemble_jacobi(mesh);
    const int n = mesh.vertex_count();
    SparseMat A = robin_operator(ja);
    Eigen::VectorXd M = ja.mass;

    SparseMat Z; // dof map: full <- reduced
    bool reduced = false;
    if (equivariant_group) {
        Z = equivariant_basis(mesh, *equivariant_group);
        reduced = true;
    }
    if (bc == JacobiBoundaryCondition::Dirichlet) {
        std::vector<Eigen::Triplet<double>> trip;
        if (reduced) {
            // Zero the boundary rows of the equivariant basis; columns that lose
            // all support are dropped below.
            for (int col = 0; col < Z.outerSize(); ++col)
                for (SparseMat::InnerIterator it(Z, col); it; ++it)
                    if (!ja.is_boundary[it.row()]) trip.emplace_back(it.row(), col, it.value());
            SparseMat Zi(n, Z.cols());
            Zi.setFromTriplets(trip.begin(), trip.end());
            Z = Zi;
        } else {
            int col = 0;
            for (int v = 0; v < n; ++v)
                if (!ja.is_boundary[v]) trip.emplace_back(v, col++, 1.0);
            Z.resize(n, col);
            Z.setFromTriplets(trip.begin(), trip.end());
        }
        reduced = true;
    }

    SparseMat A_r;
    Eigen::VectorXd M_r;
    if (reduced) {
        // Orbit supports are disjoint, so Z^T M Z is diagonal.
        Eigen::VectorXd col_mass = Eigen::VectorXd::Zero(Z.cols());
        for (int col = 0; col < Z.outerSize(); ++col)
            for (SparseMat::InnerIterator it(Z, col); it; ++it)
                col_mass[col] += it.value() * it.value() * M[it.row()];
        std::vector<int> keep;
        for (int c = 0; c < col_mass.size(); ++c)
            if (col_mass[c] > 0.0) keep.push_back(c);
        if (static_cast<int>(keep.size()) != Z.cols()) {
            std::vector<Eigen::Triplet<double>> trip;
            for (size_t kcol = 0; kcol < keep.size(); ++kcol)
                for (SparseMat::InnerIterator it(Z, keep[kcol]); it; ++it)
                    trip.emplace_back(it.row(), static_cast<int>(kcol), it.value());
            SparseMat Zk(n, static_cast<int>(keep.size()));
            Zk.setFromTriplets(trip.begin(), trip.end());
            Z = Zk;
        }
        A_r = SparseMat(Z.transpose() * A * Z);
        M_r.resize(Z.cols());
        M_r.setZero();
        for (int col = 0; col < Z.outerSize(); ++col)
            for (SparseMat::InnerIterator it(Z, col); it; ++it)
                M_r[col] += it.value() * it.value() * M[it.row()];
    } else {
        A_r = A;
        M_r = M;
    }

    SpectrumReport report;
    report.problem = bc == JacobiBoundaryCondition::Robin ? "jacobi-robin" : "jacobi-dirichlet";
    report.subspace = equivariant_group ? "equivariant" : "full";
    const int nr = static_cast<int>(A_r.rows());
    if (nr == 0) {
        report.index_cutoff = tol.index_rel;
        report.eigenfunctions = Eigen::MatrixXd::Zero(n, 0);
        return report;
    }

    // Solve with enough eigenpairs to cover the negatives.
    int kk = std::min(nr, std::max(k, 12));
    EigResult eig;
    for (;;) {
        eig = lowest_eigenpairs(A_r, M_r, kk);
        if (!eig.converged)
            throw std::runtime_error("jacobi_spectrum: eigensolver did not converge; residual " +
                                     std::to_string(eig.residuals.empty() ? -1.0
                                                                          : eig.residuals.back()));
        if (kk == nr || (!eig.values.empty() && eig.values.back() > 0.0)) break;
        kk = std::min(nr, 2 * kk);
    }

    double scale = 0.0;
    for (double v : eig.values) scale = std::max(scale, std::abs(v));
    report.index_cutoff = tol.index_rel * std::max(scale, 1e-12);
    // Exact count by Sylvester inertia, independent of eigenpair extraction.
    report.negative_count = count_eigenvalues_below(A_r, M_r, -report.index_cutoff);
    const int keep = std::min<int>(k, static_cast<int>(eig.values.size()));
    report.eigenvalues.assign(eig.values.begin(), eig.values.begin() + keep);
    for (int i = 0; i < keep; ++i)
        report.max_residual = std::max(report.max_residual, eig.residuals[i]);
    report.eigenfunctions = Eigen::MatrixXd::Zero(n, keep);
    for (int i = 0; i < keep; ++i) {
        if (reduced)
            report.eigenfunctions.col(i) = Z * eig.vectors.col(i);
        else
            report.eigenfunctions.col(i) = eig.vectors.col(i);
    }
    return report;
}

double variational_rayleigh(const TriMesh& mesh, const Eigen::VectorXd& u) {
    if (u.size() != mesh.vertex_count())
        throw std::invalid_argument("variational_rayleigh: size mismatch");
    if (u.norm() == 0.0) throw std::invalid_argument("variational_rayleigh: zero function");
    JacobiAssembly ja = assemble_jacobi(mesh);
    const SparseMat A = robin_operator(ja);
    const double q = u.dot(A * u);
    const double m = u.dot(ja.mass.cwiseProduct(u));
    return q / m;
}

XPerpResidual jacobi_residual_xperp(const TriMesh& mesh) {
    JacobiAssembly ja = assemble_jacobi(mesh);
    const auto jets = osculating_jets(mesh);
    const int n = mesh.vertex_count();
    Eigen::VectorXd u(n);
    for (int v = 0; v < n; ++v) u[v] = mesh.vertices[v].dot(jets.normals[v]);

    const Eigen::VectorXd r =
        ja.stiffness * u - ja.mass.cwiseProduct(ja.potential.cwiseProduct(u));
    XPerpResidual out;
    for (int v = 0; v < n; ++v)
        if (ja.is_boundary[v]) out.boundary_max = std::max(out.boundary_max, std::abs(u[v]));

    // Energy-dual norm of the interior residual, sqrt(r^T (S+M)^{-1} r): the
    // pointwise residual of a cotan operator does not converge, the dual norm
    // does (first order).
    std::vector<int> interior;
    for (int v = 0; v < n; ++v)
        if (!ja.is_boundary[v]) interior.push_back(v);
    if (interior.empty()) return out;
    std::vector<int> where(n, -1);
    for (size_t i = 0; i < interior.size(); ++i) where[interior[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < ja.stiffness.outerSize(); ++col)
        for (SparseMat::InnerIterator it(ja.stiffness, col); it; ++it)
            if (where[it.row()] >= 0 && where[col] >= 0)
                trip.emplace_back(where[it.row()], where[col], it.value());
    for (size_t i = 0; i < interior.size(); ++i)
        trip.emplace_back(static_cast<int>(i), static_cast<int>(i), ja.mass[interior[i]]);
    SparseMat H(static_cast<int>(interior.size()), static_cast<int>(interior.size()));
    H.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<SparseMat> llt(H);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("jacobi_residual_xperp: interior factorization failed");
    Eigen::VectorXd ri(static_cast<int>(interior.size()));
    for (size_t i = 0; i < interior.size(); ++i) ri[static_cast<int>(i)] = r[interior[i]];
    out.interior_residual = std::sqrt(std::max(0.0, ri.dot(llt.solve(ri))));
    return out;
}

FundamentalDomainCensus fundamental_domain_census(const TriMesh& mesh, const Tolerances& tol) {
    FundamentalDomainCensus census;
    // Flat coordinate disc: every vertex on one symmetry plane.
    for (int k = 0; k < 3; ++k) {
        bool flat = true;
        for (const auto& v : mesh.vertices)
            if (std::abs(v[k]) > tol.isotropy) {
                flat = false;
                break;
            }
        if (flat) {
            census.skipped_flat_disc = true;
            return census;
        }
    }

    // Restrict to the closed octant: the identity copy of the patch.
    TriMesh sub;
    sub.vertices = mesh.vertices;
    sub.on_sphere = mesh.on_sphere;
    for (const auto& t : mesh.triangles) {
        bool keep = true;
        for (int e = 0; e < 3 && keep; ++e)
            for (int c = 0; c < 3; ++c)
                if (mesh.vertices[t[e]][c] < -1e-12) {
                    keep = false;
                    break;
                }
        if (keep) sub.triangles.push_back(t);
    }
    if (sub.triangles.empty())
        throw std::runtime_error("fundamental_domain_census: octant restriction is empty");

    TopologySummary topo = topology(sub);
    census.chi = topo.euler_characteristic;
    const auto loops = boundary_loops(sub);
    census.boundary_loops = static_cast<int>(loops.size());

    // Corner vertices sit on at least two faces of the octant boundary
    // (coordinate planes and the sphere).
    auto face_count = [&](int v) {
        int faces = 0;
        for (int c = 0; c < 3; ++c)
            if (std::abs(mesh.vertices[v][c]) < tol.isotropy) ++faces;
        if (!mesh.on_sphere.empty() && mesh.on_sphere[v]) ++faces;
        return faces;
    };

    int arcs = 0;
    int sphere_runs = 0;
    for (const auto& loop : loops) {
        int corners = 0;
        for (int v : loop)
            if (face_count(v) >= 2) ++corners;
        arcs += corners;
        // Count maximal runs of sphere-flagged vertices around the loop.
        const int L = static_cast<int>(loop.size());
        for (int i = 0; i < L; ++i) {
            const bool cur = mesh.on_sphere[loop[i]] != 0;
            const bool prev = mesh.on_sphere[loop[(i + L - 1) % L]] != 0;
            if (cur && !prev) ++sphere_runs;
        }
    }
    census.smooth_edges = arcs;
    census.gauss_bonnet_identity = (4 * census.chi == census.smooth_edges - 1);
    census.single_spherical_arc = (sphere_runs == 1);
    return census;
}

ParityVerdict boundary_parity_check(const TriMesh& mesh, const Tolerances& tol) {
    ParityVerdict verdict;
    TopologySummary topo = topology(mesh);
    verdict.boundary_components = topo.boundary_components;
    if (topo.connected_components != 1) {
        verdict.pass = false;
        verdict.reason = "mesh is not connected";
        return verdict;
    }
    if (topo.boundary_components % 2 == 0) {
        verdict.pass = true;
        verdict.reason = "even boundary count";
        return verdict;
    }
    for (int k = 0; k < 3; ++k) {
        bool flat = true;
        for (const auto& v : mesh.vertices)
            if (std::abs(v[k]) > tol.isotropy) {
                flat = false;
                break;
            }
        if (flat) {
            verdict.pass = true;
            verdict.flat_disc_exception = true;
            verdict.reason = "coordinate flat disc";
            return verdict;
        }
    }
    verdict.pass = false;
    verdict.reason = "odd boundary count and not a flat disc";
    return verdict;
}

} // namespace fbms
