#include "adkit/detector.hpp"

#include "adkit/errors.hpp"
#include "adkit/kernels.hpp"

#include <cmath>
#include <numbers>

namespace adkit::det::detail {

namespace {

constexpr double kVarianceFloor = 1e-6;

bool row_is_zero(const Matrix& m, std::size_t i) {
    const double* r = m.row(i);
    for (std::size_t j = 0; j < m.cols; ++j)
        if (r[j] != 0.0) return false;
    return true;
}

// Top `m` principal directions from the D x D covariance eigenproblem.
// Always yields a full orthonormal set (zero eigenvalues included), so it is
// also the fallback when the small-sample route collapses.
Matrix basis_from_covariance(const Matrix& centered, std::size_t latent_dim) {
    const std::size_t dim = centered.cols;
    Matrix cov(dim, dim);
    kernels::grad_weights(centered, centered, cov); // centered^T centered
    const double inv_n = 1.0 / static_cast<double>(centered.rows);
    for (double& v : cov.a) v *= inv_n;
    const auto eig = jacobi_eigen_symmetric(cov);
    Matrix basis(latent_dim, dim);
    for (std::size_t k = 0; k < latent_dim; ++k)
        std::copy(eig.vectors.row(k), eig.vectors.row(k) + dim, basis.row(k));
    return basis;
}

// Small-sample route through the n x n Gram matrix: eigenvectors of
// (Xc Xc^T)/n map to principal directions via Xc^T v. Only valid while the
// requested dimension stays below the sample count.
bool basis_from_gram(const Matrix& centered, std::size_t latent_dim, Matrix& basis) {
    const std::size_t n = centered.rows;
    const std::size_t dim = centered.cols;
    Matrix gram(n, n);
    kernels::matmul_nt(centered, centered, gram);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : gram.a) v *= inv_n;
    const auto eig = jacobi_eigen_symmetric(gram);
    basis = Matrix(latent_dim, dim);
    for (std::size_t k = 0; k < latent_dim; ++k) {
        double* u = basis.row(k);
        kernels::matvec_t(centered, eig.vectors.row(k), u);
        double norm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) norm += u[j] * u[j];
        norm = std::sqrt(norm);
        if (norm <= 1e-12) return false; // rank-deficient: eigenvalue ~ 0
        for (std::size_t j = 0; j < dim; ++j) u[j] /= norm;
    }
    return true;
}

} // namespace

LatentGaussian fit_latent_gaussian(const Matrix& train_matrix, std::size_t latent_dim) {
    const std::size_t n = train_matrix.rows;
    const std::size_t dim = train_matrix.cols;
    if (n == 0) throw ValidationError("latent_gaussian: empty training set");
    if (latent_dim == 0 || latent_dim > dim)
        throw ValidationError("latent_gaussian: latent dimension must be in [1, D]");

    LatentGaussian g;
    g.pca_mean.assign(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += train_matrix.at(i, j);
        g.pca_mean[j] = acc / static_cast<double>(n);
    }

    Matrix centered(n, dim);
    kernels::parallel_for(n, [&](std::size_t i) {
        const double* src = train_matrix.row(i);
        double* dst = centered.row(i);
        for (std::size_t j = 0; j < dim; ++j) dst[j] = src[j] - g.pca_mean[j];
    });

    bool have_basis = false;
    if (n < dim && latent_dim < n)
        have_basis = basis_from_gram(centered, latent_dim, g.basis);
    if (!have_basis) g.basis = basis_from_covariance(centered, latent_dim);

    mgs_orthonormalize_rows(g.basis, latent_dim);
    for (std::size_t k = 0; k < latent_dim; ++k)
        if (row_is_zero(g.basis, k))
            throw ValidationError("latent_gaussian: training data cannot support an "
                                  "orthonormal basis of dimension " +
                                  std::to_string(latent_dim));

    // Latent statistics from the actual projections (population variance,
    // floored so the Gaussian never degenerates).
    Matrix z(n, latent_dim);
    kernels::parallel_for(n, [&](std::size_t i) {
        kernels::affine(g.basis, centered.row(i), nullptr, z.row(i));
    });
    g.latent_mean.assign(latent_dim, 0.0);
    g.latent_var.assign(latent_dim, 0.0);
    for (std::size_t j = 0; j < latent_dim; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += z.at(i, j);
        g.latent_mean[j] = acc / static_cast<double>(n);
    }
    for (std::size_t j = 0; j < latent_dim; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = z.at(i, j) - g.latent_mean[j];
            acc += d * d;
        }
        g.latent_var[j] = std::max(acc / static_cast<double>(n), kVarianceFloor);
    }

    double log_norm = 0.0;
    for (const double var : g.latent_var)
        log_norm += 0.5 * std::log(2.0 * std::numbers::pi * var);
    g.nll_floor = std::max(log_norm, 0.0);
    return g;
}

double latent_sample_score(const DetectorState& state, const double* x) {
    const auto& g = state.gaussian;
    const std::size_t dim = g.pca_mean.size();
    const std::size_t latent_dim = g.basis.rows;

    std::vector<double> xc(dim);
    for (std::size_t j = 0; j < dim; ++j) xc[j] = x[j] - g.pca_mean[j];

    std::vector<double> z(latent_dim);
    kernels::affine(g.basis, xc.data(), nullptr, z.data());

    double quad = 0.0;
    for (std::size_t j = 0; j < latent_dim; ++j) {
        const double d = z[j] - g.latent_mean[j];
        quad += d * d / (2.0 * g.latent_var[j]);
    }

    std::vector<double> back(dim);
    kernels::matvec_t(g.basis, z.data(), back.data());
    double residual = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double d = xc[j] - back[j];
        residual += d * d;
    }

    return quad + g.nll_floor + state.config.residual_weight * residual;
}

} // namespace adkit::det::detail
