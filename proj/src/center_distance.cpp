#include "adkit/detector.hpp"

#include "adkit/errors.hpp"
#include "adkit/kernels.hpp"

#include <cmath>

namespace adkit::det::detail {

namespace {

// Frozen features of every row of `batch`, one row per sample.
Matrix feature_rows(const DetectorState& state, const Matrix& batch) {
    const std::size_t fdim = state.features.projection.rows;
    if (batch.cols != state.features.projection.cols)
        throw DimensionError("center_distance: batch width does not match the projection");
    Matrix u(batch.rows, fdim);
    kernels::parallel_for(batch.rows, [&](std::size_t s) {
        feature_map(state.features, batch.row(s), u.row(s));
    });
    return u;
}

// Head outputs g(u) for every feature row (linear map plus bias).
Matrix head_rows(const CenterDistanceHead& head, const Matrix& u) {
    Matrix h(u.rows, head.weight.rows);
    kernels::matmul_nt(u, head.weight, h);
    const double* b = head.bias.data();
    kernels::parallel_for(u.rows, [&](std::size_t s) {
        double* row = h.row(s);
        for (std::size_t j = 0; j < head.weight.rows; ++j) row[j] += b[j];
    });
    return h;
}

} // namespace

void center_init(DetectorState& state, const Matrix& train_matrix, Rng& rng) {
    const std::size_t fdim = state.config.feature_dim;
    const std::size_t edim = state.config.embed_dim;
    auto& head = state.head;
    head.weight = Matrix(edim, fdim);
    const double s = std::sqrt(6.0 / static_cast<double>(fdim + edim));
    for (double& v : head.weight.a) v = rng.uniform(-s, s);
    head.bias.assign(edim, 0.0);
    head.weight0 = head.weight;
    head.bias0 = head.bias;

    // The center is the mean initial embedding of the training set and is
    // never moved afterwards; training pulls embeddings toward it. Embeddings
    // go through the same per-sample path scoring uses, so a training set of
    // one sample scores exactly 0 at initialization.
    const auto u = feature_rows(state, train_matrix);
    Matrix h(u.rows, edim);
    kernels::parallel_for(u.rows, [&](std::size_t s) {
        kernels::affine(head.weight, u.row(s), head.bias.data(), h.row(s));
    });
    head.center.assign(edim, 0.0);
    for (std::size_t i = 0; i < h.rows; ++i)
        for (std::size_t j = 0; j < edim; ++j) head.center[j] += h.at(i, j);
    for (double& c : head.center) c /= static_cast<double>(h.rows);
}

double center_sample_score(const DetectorState& state, const double* x) {
    const std::size_t fdim = state.features.projection.rows;
    const std::size_t edim = state.head.weight.rows;
    std::vector<double> u(fdim), h(edim);
    feature_map(state.features, x, u.data());
    kernels::affine(state.head.weight, u.data(), state.head.bias.data(), h.data());
    double acc = 0.0;
    for (std::size_t j = 0; j < edim; ++j) {
        const double diff = h[j] - state.head.center[j];
        acc += diff * diff;
    }
    return acc;
}

double center_elastic_penalty(const DetectorState& state) {
    const auto& head = state.head;
    double acc = 0.0;
    for (std::size_t i = 0; i < head.weight.a.size(); ++i) {
        const double diff = head.weight.a[i] - head.weight0.a[i];
        acc += diff * diff;
    }
    for (std::size_t j = 0; j < head.bias.size(); ++j) {
        const double diff = head.bias[j] - head.bias0[j];
        acc += diff * diff;
    }
    return state.config.lambda_elastic * acc;
}

double center_objective(const DetectorState& state, const Matrix& batch,
                        std::vector<double>* grad) {
    const auto& head = state.head;
    const std::size_t bsz = batch.rows;
    const std::size_t edim = head.weight.rows;

    const auto u = feature_rows(state, batch);
    auto h = head_rows(head, u);

    double loss = 0.0;
    for (std::size_t s = 0; s < bsz; ++s) {
        double* row = h.row(s);
        for (std::size_t j = 0; j < edim; ++j) {
            const double diff = row[j] - head.center[j];
            loss += diff * diff;
            row[j] = diff; // reuse the buffer for the residuals
        }
    }
    loss = loss / static_cast<double>(bsz) + center_elastic_penalty(state);
    if (!grad) return loss;

    // d(loss)/d(h) = 2 (h - c) / B, then the usual linear-layer contraction
    // plus the elastic pull 2 lambda (theta - theta0).
    const double scale = 2.0 / static_cast<double>(bsz);
    kernels::parallel_for(bsz, [&](std::size_t s) {
        double* row = h.row(s);
        for (std::size_t j = 0; j < edim; ++j) row[j] *= scale;
    });

    Matrix gw(edim, head.weight.cols);
    kernels::grad_weights(h, u, gw);
    grad->assign(head.weight.a.size() + head.bias.size(), 0.0);
    const double two_lambda = 2.0 * state.config.lambda_elastic;
    for (std::size_t i = 0; i < gw.a.size(); ++i)
        (*grad)[i] = gw.a[i] + two_lambda * (head.weight.a[i] - head.weight0.a[i]);
    std::vector<double> gb(edim);
    kernels::grad_bias(h, gb.data());
    for (std::size_t j = 0; j < edim; ++j)
        (*grad)[gw.a.size() + j] = gb[j] + two_lambda * (head.bias[j] - head.bias0[j]);
    return loss;
}

} // namespace adkit::det::detail
