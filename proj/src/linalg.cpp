#include "adkit/linalg.hpp"

#include "adkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adkit {

EigenResult jacobi_eigen_symmetric(const Matrix& sym) {
    if (sym.rows != sym.cols)
        throw DimensionError("jacobi_eigen_symmetric: matrix must be square");
    const std::size_t n = sym.rows;

    Matrix a = sym;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a.at(i, j) * a.at(i, j);
        return std::sqrt(2.0 * s);
    };

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a.at(i, j)));
    const double stop = (scale > 0.0 ? scale : 1.0) * 1e-14 * static_cast<double>(n);

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && off_norm() > stop; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::fabs(apq) <= stop / static_cast<double>(n * n)) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p);
                    const double vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a.at(i, i) > a.at(j, j);
    });

    EigenResult out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t col = order[k];
        out.values[k] = a.at(col, col);
        double* row = out.vectors.row(k);
        for (std::size_t i = 0; i < n; ++i) row[i] = v.at(i, col);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::fabs(row[i]) > std::fabs(row[arg])) arg = i;
        if (row[arg] < 0.0)
            for (std::size_t i = 0; i < n; ++i) row[i] = -row[i];
    }
    return out;
}

void mgs_orthonormalize_rows(Matrix& basis, std::size_t count, double tol) {
    const std::size_t n = basis.cols;
    for (std::size_t k = 0; k < count; ++k) {
        double* rk = basis.row(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double* rj = basis.row(j);
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += rk[i] * rj[i];
            for (std::size_t i = 0; i < n; ++i) rk[i] -= proj * rj[i];
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += rk[i] * rk[i];
        norm = std::sqrt(norm);
        if (norm < tol) {
            for (std::size_t i = 0; i < n; ++i) rk[i] = 0.0;
        } else {
            for (std::size_t i = 0; i < n; ++i) rk[i] /= norm;
        }
    }
}

} // namespace adkit
