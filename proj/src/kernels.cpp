#include "adkit/kernels.hpp"

#include "adkit/errors.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace adkit::kernels {

int thread_count() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void affine(const Matrix& w, const double* x, const double* b, double* y) {
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* wi = w.row(i);
        double acc = b ? b[i] : 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) acc += wi[j] * x[j];
        y[i] = acc;
    }
}

void matvec_t(const Matrix& w, const double* d, double* y) {
    for (std::size_t j = 0; j < w.cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* wi = w.row(i);
        const double di = d[i];
        for (std::size_t j = 0; j < w.cols; ++j) y[j] += di * wi[j];
    }
}

namespace {

inline double row_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

// Accumulates over the batch in ascending order for every output element, so
// the summation order (and therefore the result, bitwise) is independent of
// the loop structure chosen here.
inline void grad_weights_row(const Matrix& delta, const Matrix& act, Matrix& g,
                             std::size_t i) {
    double* gi = g.row(i);
    for (std::size_t j = 0; j < act.cols; ++j) gi[j] = 0.0;
    for (std::size_t b = 0; b < delta.rows; ++b) {
        const double coef = delta.at(b, i);
        const double* ab = act.row(b);
        for (std::size_t j = 0; j < act.cols; ++j) gi[j] += coef * ab[j];
    }
}

inline void grad_bias_col(const Matrix& delta, double* g, std::size_t i) {
    double acc = 0.0;
    for (std::size_t b = 0; b < delta.rows; ++b) acc += delta.at(b, i);
    g[i] = acc;
}

void check_matmul_nt(const Matrix& x, const Matrix& y, const Matrix& out) {
    if (x.cols != y.cols || out.rows != x.rows || out.cols != y.rows)
        throw DimensionError("matmul_nt: shape mismatch");
}

void check_grad_weights(const Matrix& delta, const Matrix& act, const Matrix& g) {
    if (delta.rows != act.rows || g.rows != delta.cols || g.cols != act.cols)
        throw DimensionError("grad_weights: shape mismatch");
}

} // namespace

void matmul_nt(const Matrix& x, const Matrix& y, Matrix& out) {
    check_matmul_nt(x, y, out);
    parallel_for(x.rows, [&](std::size_t i) {
        double* oi = out.row(i);
        for (std::size_t j = 0; j < y.rows; ++j)
            oi[j] = row_dot(x.row(i), y.row(j), x.cols);
    });
}

void matmul_nt_serial(const Matrix& x, const Matrix& y, Matrix& out) {
    check_matmul_nt(x, y, out);
    serial_for(x.rows, [&](std::size_t i) {
        double* oi = out.row(i);
        for (std::size_t j = 0; j < y.rows; ++j)
            oi[j] = row_dot(x.row(i), y.row(j), x.cols);
    });
}

void grad_weights(const Matrix& delta, const Matrix& act, Matrix& g) {
    check_grad_weights(delta, act, g);
    parallel_for(g.rows, [&](std::size_t i) { grad_weights_row(delta, act, g, i); });
}

void grad_weights_serial(const Matrix& delta, const Matrix& act, Matrix& g) {
    check_grad_weights(delta, act, g);
    serial_for(g.rows, [&](std::size_t i) { grad_weights_row(delta, act, g, i); });
}

void grad_bias(const Matrix& delta, double* g) {
    parallel_for(delta.cols, [&](std::size_t i) { grad_bias_col(delta, g, i); });
}

void grad_bias_serial(const Matrix& delta, double* g) {
    serial_for(delta.cols, [&](std::size_t i) { grad_bias_col(delta, g, i); });
}

} // namespace adkit::kernels
