#pragma once

#include <cstddef>
#include <vector>

namespace adkit {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct EigenResult {
    std::vector<double> values; // descending
    Matrix vectors;             // row k = unit eigenvector for values[k]
};

// Cyclic Jacobi diagonalization of a symmetric matrix. Deterministic: fixed
// sweep order, fixed convergence threshold on the off-diagonal norm.
// Eigenvectors are sign-normalized so the entry of largest magnitude is
// positive.
EigenResult jacobi_eigen_symmetric(const Matrix& sym);

// In-place modified Gram-Schmidt over the first `count` rows of `basis`.
// Rows that collapse below `tol` are replaced with zeros.
void mgs_orthonormalize_rows(Matrix& basis, std::size_t count, double tol = 1e-12);

} // namespace adkit
