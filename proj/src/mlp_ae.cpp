#include "adkit/detector.hpp"

#include "adkit/errors.hpp"
#include "adkit/kernels.hpp"

#include <cmath>

namespace adkit::det::detail {

namespace {

inline double leaky(double z) { return z > 0.0 ? z : 0.01 * z; }
// Leaky slope recovered from the activation: positive output implies the
// positive branch, so the stored activations suffice for backprop.
inline double leaky_slope(double a) { return a > 0.0 ? 1.0 : 0.01; }
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

FeatureExtractor make_feature_extractor(std::size_t input_dim,
                                        std::size_t feature_dim,
                                        std::uint64_t seed) {
    FeatureExtractor fx;
    fx.projection = Matrix(feature_dim, input_dim);
    Rng rng(derive_seed(seed, "features"));
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (double& v : fx.projection.a) v = rng.gaussian() * scale;
    return fx;
}

void feature_map(const FeatureExtractor& fx, const double* x, double* out) {
    kernels::affine(fx.projection, x, nullptr, out);
    for (std::size_t i = 0; i < fx.projection.rows; ++i)
        out[i] = std::log1p(std::abs(out[i]));
}

void ae_init(MlpAutoencoder& ae, std::size_t input_dim,
             const DetectorConfig& config, Rng& rng) {
    ae.layer_sizes = {input_dim, config.hidden1,  config.hidden2, config.bottleneck,
                      config.hidden2, config.hidden1, input_dim};
    ae.weights.clear();
    ae.biases.clear();
    for (std::size_t l = 0; l + 1 < ae.layer_sizes.size(); ++l) {
        const std::size_t fan_in = ae.layer_sizes[l];
        const std::size_t fan_out = ae.layer_sizes[l + 1];
        Matrix w(fan_out, fan_in);
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : w.a) v = rng.uniform(-s, s);
        ae.weights.push_back(std::move(w));
        ae.biases.emplace_back(fan_out, 0.0);
    }
}

void ae_reconstruct(const MlpAutoencoder& ae, const double* x, double* recon) {
    std::vector<double> cur(x, x + ae.layer_sizes[0]);
    std::vector<double> next;
    const std::size_t layers = ae.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        next.resize(ae.layer_sizes[l + 1]);
        kernels::affine(ae.weights[l], cur.data(), ae.biases[l].data(), next.data());
        if (l + 1 == layers)
            for (double& v : next) v = sigmoid(v);
        else
            for (double& v : next) v = leaky(v);
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), recon);
}

double ae_sample_score(const DetectorState& state, const double* x) {
    const std::size_t dim = state.side * state.side;
    std::vector<double> recon(dim);
    ae_reconstruct(state.ae, x, recon.data());

    if (state.kind == DetectorKind::ae_pixel) {
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = x[d] - recon[d];
            acc += diff * diff;
        }
        return acc / static_cast<double>(dim);
    }

    const std::size_t fdim = state.features.projection.rows;
    std::vector<double> fx(fdim), fr(fdim);
    feature_map(state.features, x, fx.data());
    feature_map(state.features, recon.data(), fr.data());
    double acc = 0.0;
    for (std::size_t j = 0; j < fdim; ++j) {
        const double diff = fx[j] - fr[j];
        acc += diff * diff;
    }
    return acc / static_cast<double>(fdim);
}

double ae_objective(const DetectorState& state, const Matrix& batch,
                    std::vector<double>* grad) {
    const auto& ae = state.ae;
    const std::size_t layers = ae.weights.size();
    const std::size_t bsz = batch.rows;
    const std::size_t dim = ae.layer_sizes.front();
    if (batch.cols != dim)
        throw DimensionError("ae: batch has " + std::to_string(batch.cols) +
                             " columns, expected " + std::to_string(dim));

    // Forward pass, keeping every activation for the backward contraction.
    std::vector<Matrix> acts(layers + 1);
    acts[0] = batch;
    for (std::size_t l = 0; l < layers; ++l) {
        acts[l + 1] = Matrix(bsz, ae.layer_sizes[l + 1]);
        kernels::matmul_nt(acts[l], ae.weights[l], acts[l + 1]);
        const double* b = ae.biases[l].data();
        const bool last = l + 1 == layers;
        kernels::parallel_for(bsz, [&, b, last](std::size_t s) {
            double* row = acts[l + 1].row(s);
            for (std::size_t j = 0; j < ae.layer_sizes[l + 1]; ++j) {
                const double z = row[j] + b[j];
                row[j] = last ? sigmoid(z) : leaky(z);
            }
        });
    }
    const Matrix& recon = acts[layers];

    double loss = 0.0;
    Matrix d_out; // gradient of the loss in the reconstruction
    const bool want_grad = grad != nullptr;
    if (want_grad) d_out = Matrix(bsz, dim);

    if (state.kind == DetectorKind::ae_pixel) {
        const double norm = static_cast<double>(bsz) * static_cast<double>(dim);
        for (std::size_t s = 0; s < bsz; ++s) {
            const double* xr = batch.row(s);
            const double* rr = recon.row(s);
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = rr[d] - xr[d];
                loss += diff * diff;
                if (want_grad) d_out.at(s, d) = 2.0 * diff / norm;
            }
        }
        loss /= norm;
    } else {
        const auto& proj = state.features.projection;
        const std::size_t fdim = proj.rows;
        const double norm = static_cast<double>(bsz) * static_cast<double>(fdim);
        Matrix vx(bsz, fdim), vr(bsz, fdim);
        kernels::matmul_nt(batch, proj, vx);
        kernels::matmul_nt(recon, proj, vr);
        // d(feature)/d(pre-projection): log1p(|v|) has slope sign(v)/(1+|v|).
        Matrix dv;
        if (want_grad) dv = Matrix(bsz, fdim);
        for (std::size_t s = 0; s < bsz; ++s) {
            for (std::size_t j = 0; j < fdim; ++j) {
                const double a = vx.at(s, j);
                const double b = vr.at(s, j);
                const double diff = std::log1p(std::abs(b)) - std::log1p(std::abs(a));
                loss += diff * diff;
                if (want_grad) {
                    const double sign_b = b > 0.0 ? 1.0 : (b < 0.0 ? -1.0 : 0.0);
                    dv.at(s, j) = (2.0 * diff / norm) * sign_b / (1.0 + std::abs(b));
                }
            }
        }
        loss /= norm;
        if (want_grad)
            kernels::parallel_for(bsz, [&](std::size_t s) {
                kernels::matvec_t(proj, dv.row(s), d_out.row(s));
            });
    }

    if (!want_grad) return loss;

    // Flat slot ranges per layer: weight block then bias block.
    std::size_t total = 0;
    std::vector<std::size_t> offsets(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        offsets[l] = total;
        total += ae.weights[l].a.size() + ae.biases[l].size();
    }
    grad->assign(total, 0.0);

    // Backward pass: sigmoid slope at the output, leaky slope inside.
    Matrix delta(bsz, dim);
    kernels::parallel_for(bsz, [&](std::size_t s) {
        const double* a = recon.row(s);
        const double* g = d_out.row(s);
        double* dr = delta.row(s);
        for (std::size_t j = 0; j < dim; ++j) dr[j] = g[j] * a[j] * (1.0 - a[j]);
    });

    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t out_dim = ae.layer_sizes[l + 1];
        const std::size_t in_dim = ae.layer_sizes[l];
        Matrix gw(out_dim, in_dim);
        kernels::grad_weights(delta, acts[l], gw);
        double* slot = grad->data() + offsets[l];
        std::copy(gw.a.begin(), gw.a.end(), slot);
        kernels::grad_bias(delta, slot + gw.a.size());

        if (l == 0) break;
        Matrix prev(bsz, in_dim);
        kernels::parallel_for(bsz, [&](std::size_t s) {
            double* pr = prev.row(s);
            kernels::matvec_t(ae.weights[l], delta.row(s), pr);
            const double* ar = acts[l].row(s);
            for (std::size_t j = 0; j < in_dim; ++j) pr[j] *= leaky_slope(ar[j]);
        });
        delta = std::move(prev);
    }
    return loss;
}

} // namespace adkit::det::detail
