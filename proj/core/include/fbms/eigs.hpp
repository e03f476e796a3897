#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace fbms {

using SparseMat = Eigen::SparseMatrix<double>;

struct EigResult {
    std::vector<double> values;            // ascending
    Eigen::MatrixXd vectors;               // columns match values
    std::vector<double> residuals;         // ||A v - lambda M v|| / ||A v||-scale
    bool converged = false;
};

// k lowest eigenpairs of A v = lambda M v with A symmetric and M diagonal
// positive. Shift-invert Lanczos with full reorthogonalization; the shift is
// positioned just below the spectrum by LDLT inertia probing.
EigResult lowest_eigenpairs(const SparseMat& A, const Eigen::VectorXd& M_diag, int k);

// Dense fallback for small problems / cross-checks.
EigResult lowest_eigenpairs_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& M_diag, int k);

// Number of eigenvalues of the pencil strictly below `threshold`, by Sylvester
// inertia of A - threshold*M (exact integer, no eigenvectors needed).
int count_eigenvalues_below(const SparseMat& A, const Eigen::VectorXd& M_diag, double threshold);

} // namespace fbms
