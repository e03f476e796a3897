#include "fbms/eigs.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fbms {

namespace {

SparseMat shifted_matrix(const SparseMat& A, const Eigen::VectorXd& M_diag, double sigma) {
    const int n = static_cast<int>(A.rows());
    SparseMat shift(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n);
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, -sigma * M_diag[i]);
    shift.setFromTriplets(trip.begin(), trip.end());
    SparseMat out = A + shift;
    out.makeCompressed();
    return out;
}

int inertia_below(const SparseMat& A, const Eigen::VectorXd& M_diag, double threshold) {
    // LDLT without pivoting can hit a zero pivot when threshold is an
    // eigenvalue; jitter and retry.
    double t = threshold;
    for (int attempt = 0; attempt < 5; ++attempt) {
        Eigen::SimplicialLDLT<SparseMat> ldlt(shifted_matrix(A, M_diag, t));
        if (ldlt.info() == Eigen::Success) {
            const auto& d = ldlt.vectorD();
            int count = 0;
            bool clean = true;
            for (int i = 0; i < d.size(); ++i) {
                if (d[i] < 0.0) ++count;
                if (d[i] == 0.0 || !std::isfinite(d[i])) clean = false;
            }
            if (clean) return count;
        }
        t = threshold + (attempt + 1) * 1.37e-9 * std::max(1.0, std::abs(threshold));
    }
    throw std::runtime_error("inertia probe failed near threshold " + std::to_string(threshold));
}

EigResult run_lanczos(const SparseMat& A, const Eigen::VectorXd& M_diag, int k, int max_steps,
                      double sigma) {
    const int n = static_cast<int>(A.rows());
    Eigen::SimplicialLLT<SparseMat> llt(shifted_matrix(A, M_diag, sigma));
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("eigensolver: factorization of the shifted pencil failed");

    max_steps = std::min(n, max_steps);
    Eigen::MatrixXd V(n, max_steps + 1);
    Eigen::VectorXd alpha(max_steps), beta(max_steps);

    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) v[i] += 0.1 * std::sin(1.7 * i + 0.3) + 0.05 * std::cos(0.3 * i);
    v /= std::sqrt(v.dot(M_diag.cwiseProduct(v)));
    V.col(0) = v;

    int steps = 0;
    for (int j = 0; j < max_steps; ++j) {
        Eigen::VectorXd w = llt.solve(M_diag.cwiseProduct(V.col(j)));
        alpha[j] = w.dot(M_diag.cwiseProduct(V.col(j)));
        w -= alpha[j] * V.col(j);
        if (j > 0) w -= beta[j - 1] * V.col(j - 1);
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i)
                w -= (w.dot(M_diag.cwiseProduct(V.col(i)))) * V.col(i);
        beta[j] = std::sqrt(std::max(0.0, w.dot(M_diag.cwiseProduct(w))));
        steps = j + 1;
        if (beta[j] < 1e-13) break;
        V.col(j + 1) = w / beta[j];
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < steps) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);

    std::vector<int> order(steps);
    for (int i = 0; i < steps; ++i) order[i] = i;
    // Largest Ritz values of the shift-inverted operator are nearest sigma.
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return es.eigenvalues()[a] > es.eigenvalues()[b]; });

    const int take = std::min(k, steps);
    std::vector<std::pair<double, int>> pairs;
    for (int i = 0; i < take; ++i) {
        const double theta = es.eigenvalues()[order[i]];
        if (theta <= 0.0) break; // beyond the resolvable window
        pairs.emplace_back(sigma + 1.0 / theta, order[i]);
    }
    std::sort(pairs.begin(), pairs.end());

    EigResult result;
    result.vectors.resize(n, static_cast<int>(pairs.size()));
    result.converged = static_cast<int>(pairs.size()) == take;
    for (size_t i = 0; i < pairs.size(); ++i) {
        result.values.push_back(pairs[i].first);
        result.vectors.col(static_cast<int>(i)) =
            V.leftCols(steps) * es.eigenvectors().col(pairs[i].second);
        Eigen::VectorXd r = A * result.vectors.col(static_cast<int>(i)) -
                            pairs[i].first * M_diag.cwiseProduct(result.vectors.col(static_cast<int>(i)));
        const double res = r.norm() / std::max(1.0, std::abs(pairs[i].first));
        result.residuals.push_back(res);
        if (res > 1e-7) result.converged = false;
    }
    return result;
}

} // namespace

int count_eigenvalues_below(const SparseMat& A, const Eigen::VectorXd& M_diag, double threshold) {
    if (A.rows() == 0) return 0;
    return inertia_below(A, M_diag, threshold);
}

EigResult lowest_eigenpairs(const SparseMat& A, const Eigen::VectorXd& M_diag, int k) {
    const int n = static_cast<int>(A.rows());
    EigResult empty;
    empty.converged = true;
    if (n == 0 || k <= 0) return empty;
    k = std::min(k, n);
    if (n <= std::max(4 * k, 96)) return lowest_eigenpairs_dense(Eigen::MatrixXd(A), M_diag, k);

    // Position the shift just below the spectrum: grow sigma geometrically
    // until no eigenvalue lies below it.
    double sigma = -1.0;
    for (int i = 0; i < 60 && inertia_below(A, M_diag, sigma) > 0; ++i) sigma *= 4.0;

    EigResult result = run_lanczos(A, M_diag, k, std::max(2 * k + 40, 60), sigma);
    if (!result.converged)
        result = run_lanczos(A, M_diag, k, std::max(4 * k + 160, 200), sigma);
    if (!result.converged && n <= 2500)
        return lowest_eigenpairs_dense(Eigen::MatrixXd(A), M_diag, k);
    return result;
}

EigResult lowest_eigenpairs_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& M_diag,
                                  int k) {
    const int n = static_cast<int>(A.rows());
    EigResult result;
    if (n == 0 || k <= 0) {
        result.converged = true;
        return result;
    }
    k = std::min(k, n);
    const Eigen::VectorXd inv_sqrt = M_diag.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd B = inv_sqrt.asDiagonal() * A * inv_sqrt.asDiagonal();
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    result.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
        result.values.push_back(es.eigenvalues()[i]);
        result.vectors.col(i) = inv_sqrt.asDiagonal() * es.eigenvectors().col(i);
        result.residuals.push_back(0.0);
    }
    result.converged = true;
    return result;
}

} // namespace fbms
