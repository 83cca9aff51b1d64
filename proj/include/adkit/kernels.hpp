#pragma once

#include "adkit/linalg.hpp"

#include <cstddef>

namespace adkit::kernels {

// Data-parallel inner kernels used by training and scoring.
//
// Determinism contract: every output element is produced by exactly one
// thread running a fixed-order serial summation, and the per-element code is
// shared between the parallel and serial entry points. Results are therefore
// bit-identical to the *_serial reference implementations for any thread
// count, which the test suite asserts and the bench target times.

// Number of threads the parallel drivers will use (1 when built without
// OpenMP).
int thread_count();

// y[0..rows) = W x + b; b may be null. Serial building block.
void affine(const Matrix& w, const double* x, const double* b, double* y);

// y[0..cols) = W^T d. Serial building block.
void matvec_t(const Matrix& w, const double* d, double* y);

// out = X Y^T where X is (n x k) and Y is (m x k); out must be (n x m).
void matmul_nt(const Matrix& x, const Matrix& y, Matrix& out);
void matmul_nt_serial(const Matrix& x, const Matrix& y, Matrix& out);

// g = delta^T act where delta is (batch x out) and act is (batch x in);
// g must be (out x in). This is the weight-gradient contraction.
void grad_weights(const Matrix& delta, const Matrix& act, Matrix& g);
void grad_weights_serial(const Matrix& delta, const Matrix& act, Matrix& g);

// g[0..cols) = column sums of delta (the bias gradient).
void grad_bias(const Matrix& delta, double* g);
void grad_bias_serial(const Matrix& delta, double* g);

// Runs fn(i) for i in [0, n) across threads; every index is executed exactly
// once, so fn must write only to index-i slots.
template <class F>
void parallel_for(std::size_t n, F&& fn);

template <class F>
void serial_for(std::size_t n, F&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

} // namespace adkit::kernels

#if defined(_OPENMP)
#include <omp.h>
template <class F>
void adkit::kernels::parallel_for(std::size_t n, F&& fn) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        fn(static_cast<std::size_t>(i));
}
#else
template <class F>
void adkit::kernels::parallel_for(std::size_t n, F&& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}
#endif
