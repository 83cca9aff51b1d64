#include "adkit/detector.hpp"

#include "adkit/errors.hpp"
#include "adkit/kernels.hpp"

#include <cmath>
#include <numeric>

namespace adkit::det {

std::string to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::ae_pixel: return "ae_pixel";
        case DetectorKind::ae_feature: return "ae_feature";
        case DetectorKind::center_distance: return "center_distance";
        case DetectorKind::latent_gaussian: return "latent_gaussian";
    }
    throw ValidationError("unknown detector kind value");
}

DetectorKind parse_detector_kind(const std::string& token) {
    if (token == "ae_pixel") return DetectorKind::ae_pixel;
    if (token == "ae_feature") return DetectorKind::ae_feature;
    if (token == "center_distance") return DetectorKind::center_distance;
    if (token == "latent_gaussian") return DetectorKind::latent_gaussian;
    throw ParseError("unknown detector kind '" + token + "'");
}

bool is_gradient_kind(DetectorKind kind) {
    return kind != DetectorKind::latent_gaussian;
}

DetectorConfig default_config(DetectorKind kind) {
    DetectorConfig config;
    if (kind == DetectorKind::center_distance) config.learning_rate = 0.01;
    return config;
}

namespace detail {

Matrix to_matrix(const std::vector<data::Patch>& patches, std::size_t side) {
    Matrix m(patches.size(), side * side);
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const auto& p = patches[i];
        if (p.width != side || p.height != side)
            throw DimensionError("detector: patch is " + std::to_string(p.width) + "x" +
                                 std::to_string(p.height) + ", expected side " +
                                 std::to_string(side));
        std::copy(p.pixels.begin(), p.pixels.end(), m.row(i));
    }
    return m;
}

double objective_on_matrix(const DetectorState& state, const Matrix& batch,
                           std::vector<double>* grad) {
    if (batch.rows == 0) throw ValidationError("detector: empty batch");
    switch (state.kind) {
        case DetectorKind::ae_pixel:
        case DetectorKind::ae_feature:
            return ae_objective(state, batch, grad);
        case DetectorKind::center_distance:
            return center_objective(state, batch, grad);
        case DetectorKind::latent_gaussian: {
            if (grad) grad->clear();
            double acc = 0.0;
            for (std::size_t i = 0; i < batch.rows; ++i)
                acc += latent_sample_score(state, batch.row(i));
            return acc / static_cast<double>(batch.rows);
        }
    }
    throw ValidationError("unknown detector kind value");
}

namespace {

// Walks the trainable parameters in their flat order.
template <class Fn>
void for_each_parameter(DetectorState& state, Fn&& fn) {
    switch (state.kind) {
        case DetectorKind::ae_pixel:
        case DetectorKind::ae_feature:
            for (std::size_t l = 0; l < state.ae.weights.size(); ++l) {
                for (double& w : state.ae.weights[l].a) fn(w);
                for (double& b : state.ae.biases[l]) fn(b);
            }
            return;
        case DetectorKind::center_distance:
            for (double& w : state.head.weight.a) fn(w);
            for (double& b : state.head.bias) fn(b);
            return;
        case DetectorKind::latent_gaussian:
            return;
    }
    throw ValidationError("unknown detector kind value");
}

} // namespace
} // namespace detail

DetectorState init_detector(DetectorKind kind, std::size_t side,
                            const DetectorConfig& config, std::uint64_t seed,
                            const std::vector<data::Patch>& train_samples) {
    if (train_samples.empty())
        throw ValidationError("init_detector: empty training set");
    if (side == 0) throw ValidationError("init_detector: side must be positive");
    const std::size_t dim = side * side;
    if (config.batch_size == 0)
        throw ValidationError("init_detector: batch_size must be positive");

    DetectorState state;
    state.kind = kind;
    state.side = side;
    state.epoch = 0;
    state.seed = seed;
    state.config = config;

    const auto train_matrix = detail::to_matrix(train_samples, side);
    Rng init_rng(derive_seed(seed, "init"));

    switch (kind) {
        case DetectorKind::ae_pixel:
        case DetectorKind::ae_feature: {
            if (config.bottleneck == 0 || config.bottleneck >= dim)
                throw ValidationError("init_detector: bottleneck must be in [1, side^2)");
            if (config.hidden1 == 0 || config.hidden2 == 0)
                throw ValidationError("init_detector: hidden widths must be positive");
            detail::ae_init(state.ae, dim, config, init_rng);
            if (kind == DetectorKind::ae_feature) {
                if (config.feature_dim == 0)
                    throw ValidationError("init_detector: feature_dim must be positive");
                state.features = detail::make_feature_extractor(
                    dim, config.feature_dim, seed);
            }
            break;
        }
        case DetectorKind::center_distance: {
            if (config.feature_dim == 0 || config.embed_dim == 0)
                throw ValidationError("init_detector: feature and embed dims must be positive");
            if (config.lambda_elastic < 0.0)
                throw ValidationError("init_detector: lambda_elastic must be nonnegative");
            state.features = detail::make_feature_extractor(dim, config.feature_dim, seed);
            detail::center_init(state, train_matrix, init_rng);
            break;
        }
        case DetectorKind::latent_gaussian: {
            if (config.latent_dim == 0 || config.latent_dim > dim)
                throw ValidationError("init_detector: latent_dim must be in [1, side^2]");
            if (config.residual_weight < 0.0)
                throw ValidationError("init_detector: residual_weight must be nonnegative");
            state.gaussian = detail::fit_latent_gaussian(train_matrix, config.latent_dim);
            break;
        }
    }
    return state;
}

double train_epoch(DetectorState& state, const std::vector<data::Patch>& train_samples) {
    if (train_samples.empty())
        throw ValidationError("train_epoch: empty training set");
    const std::uint64_t running_epoch = state.epoch + 1;

    if (!is_gradient_kind(state.kind)) {
        const auto batch = detail::to_matrix(train_samples, state.side);
        const double loss = detail::objective_on_matrix(state, batch, nullptr);
        state.epoch = running_epoch;
        return loss;
    }

    std::vector<std::size_t> order(train_samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(state.seed, "shuffle-" + std::to_string(running_epoch)));
    shuffle_rng.shuffle(order);

    const std::size_t n = order.size();
    const std::size_t batch_size = state.config.batch_size;
    const std::size_t dim = state.side * state.side;
    const double lr = state.config.learning_rate;

    std::vector<double> grad;
    double loss_acc = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t count = std::min(batch_size, n - start);
        Matrix batch(count, dim);
        for (std::size_t i = 0; i < count; ++i) {
            const auto& p = train_samples[order[start + i]];
            if (p.width != state.side || p.height != state.side)
                throw DimensionError("train_epoch: patch does not match detector side");
            std::copy(p.pixels.begin(), p.pixels.end(), batch.row(i));
        }
        const double loss = detail::objective_on_matrix(state, batch, &grad);
        if (!std::isfinite(loss))
            throw DivergenceError("training diverged at epoch " +
                                  std::to_string(running_epoch) + " (non-finite loss)");
        loss_acc += loss * static_cast<double>(count);
        if (state.kind == DetectorKind::center_distance &&
            state.config.lambda_elastic > 0.0) {
            // The elastic penalty is applied through its exact proximal map
            // instead of an explicit gradient term: step on the data gradient,
            // then shrink toward the initial parameters. This stays stable for
            // any lambda (an explicit step blows up once 2*lr*lambda > 2) and
            // makes lambda -> infinity an exact freeze at the initial weights.
            const double two_lambda = 2.0 * state.config.lambda_elastic;
            const double shrink = 1.0 / (1.0 + lr * two_lambda);
            auto& head = state.head;
            std::size_t slot = 0;
            for (std::size_t i = 0; i < head.weight.a.size(); ++i, ++slot) {
                const double anchor = head.weight0.a[i];
                const double g_data =
                    grad[slot] - two_lambda * (head.weight.a[i] - anchor);
                head.weight.a[i] =
                    anchor + (head.weight.a[i] - lr * g_data - anchor) * shrink;
            }
            for (std::size_t j = 0; j < head.bias.size(); ++j, ++slot) {
                const double anchor = head.bias0[j];
                const double g_data = grad[slot] - two_lambda * (head.bias[j] - anchor);
                head.bias[j] = anchor + (head.bias[j] - lr * g_data - anchor) * shrink;
            }
        } else {
            std::size_t slot = 0;
            detail::for_each_parameter(state,
                                       [&](double& value) { value -= lr * grad[slot++]; });
        }
    }
    state.epoch = running_epoch;
    return loss_acc / static_cast<double>(n);
}

double score(const DetectorState& state, const data::Patch& patch) {
    if (patch.width != state.side || patch.height != state.side)
        throw DimensionError("score: patch is " + std::to_string(patch.width) + "x" +
                             std::to_string(patch.height) + ", detector side is " +
                             std::to_string(state.side));
    const double* x = patch.pixels.data();
    switch (state.kind) {
        case DetectorKind::ae_pixel:
        case DetectorKind::ae_feature:
            return detail::ae_sample_score(state, x);
        case DetectorKind::center_distance:
            return detail::center_sample_score(state, x);
        case DetectorKind::latent_gaussian:
            return detail::latent_sample_score(state, x);
    }
    throw ValidationError("unknown detector kind value");
}

std::vector<double> score_batch(const DetectorState& state,
                                const std::vector<data::Patch>& patches) {
    std::vector<double> scores(patches.size());
    kernels::parallel_for(patches.size(),
                          [&](std::size_t i) { scores[i] = score(state, patches[i]); });
    return scores;
}

std::vector<double> score_batch_serial(const DetectorState& state,
                                       const std::vector<data::Patch>& patches) {
    std::vector<double> scores(patches.size());
    kernels::serial_for(patches.size(),
                        [&](std::size_t i) { scores[i] = score(state, patches[i]); });
    return scores;
}

double evaluation_loss(const DetectorState& state,
                       const std::vector<data::Patch>& samples) {
    if (samples.empty()) throw ValidationError("evaluation_loss: empty sample list");
    const auto scores = score_batch(state, samples);
    double acc = 0.0;
    for (const double s : scores) acc += s;
    double loss = acc / static_cast<double>(scores.size());
    if (state.kind == DetectorKind::center_distance)
        loss += detail::center_elastic_penalty(state);
    return loss;
}

std::vector<double> flatten_parameters(const DetectorState& state) {
    std::vector<double> flat;
    detail::for_each_parameter(const_cast<DetectorState&>(state),
                               [&](double& value) { flat.push_back(value); });
    return flat;
}

void set_parameters(DetectorState& state, std::span<const double> values) {
    std::size_t slot = 0;
    detail::for_each_parameter(state, [&](double& value) {
        if (slot >= values.size())
            throw DimensionError("set_parameters: too few values");
        value = values[slot++];
    });
    if (slot != values.size())
        throw DimensionError("set_parameters: expected " + std::to_string(slot) +
                             " values, got " + std::to_string(values.size()));
}

double batch_objective(const DetectorState& state,
                       const std::vector<data::Patch>& batch,
                       std::vector<double>* grad) {
    const auto matrix = detail::to_matrix(batch, state.side);
    return detail::objective_on_matrix(state, matrix, grad);
}

} // namespace adkit::det
