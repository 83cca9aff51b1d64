#pragma once

#include "adkit/linalg.hpp"
#include "adkit/patch.hpp"
#include "adkit/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adkit::det {

// Four desk-scale one-class detectors behind a uniform train/score contract.
// All scores are nonnegative and higher means more anomalous.
enum class DetectorKind { ae_pixel, ae_feature, center_distance, latent_gaussian };

std::string to_string(DetectorKind kind);
DetectorKind parse_detector_kind(const std::string& token);

// True for the SGD-trained kinds (everything except latent_gaussian, which is
// fitted in closed form at init and has a no-op train_epoch).
bool is_gradient_kind(DetectorKind kind);

struct DetectorConfig {
    double learning_rate = 0.05;
    std::size_t batch_size = 16;
    // Autoencoder widths: layer sizes [D, hidden1, hidden2, bottleneck,
    // hidden2, hidden1, D] with D = side^2.
    std::size_t hidden1 = 128;
    std::size_t hidden2 = 64;
    std::size_t bottleneck = 16;
    // Frozen random-feature dimension f (ae_feature loss space and the
    // center_distance embedding input). Each feature sees the patch through a
    // global Gaussian projection, so separation rests on concentration across
    // many features — keep this generous.
    std::size_t feature_dim = 256;
    // center_distance head output dimension e and its pull toward the
    // initial weights.
    std::size_t embed_dim = 16;
    double lambda_elastic = 0.01;
    // latent_gaussian: latent dimension m and the weight of the off-subspace
    // reconstruction residual added to the Gaussian NLL score. The latent is
    // wide enough to cover the synthetic texture family with headroom, and the
    // residual carries most of the anomaly signal (a sample that projects to
    // nothing looks maximally likely to the Gaussian part), so it gets a
    // strong weight.
    std::size_t latent_dim = 32;
    double residual_weight = 4.0;
};

// Per-kind defaults: learning rate 0.05 for the autoencoders, 0.01 for
// center_distance; everything else as the field initializers above.
DetectorConfig default_config(DetectorKind kind);

// Fully-connected autoencoder, leaky-rectifier (slope 0.01) hidden layers,
// logistic-sigmoid output layer.
struct MlpAutoencoder {
    std::vector<std::size_t> layer_sizes;        // [D, h1, h2, b, h2, h1, D]
    std::vector<Matrix> weights;         // weights[l]: sizes[l+1] x sizes[l]
    std::vector<std::vector<double>> biases;     // biases[l]: sizes[l+1]
};

// Frozen nonlinear random features: phi(x) = log(1 + |P x|) elementwise,
// with P (f x D) filled row-major with gaussian()/sqrt(D) draws from an
// Rng seeded by derive_seed(seed, "features"). Never trained.
struct FeatureExtractor {
    Matrix projection;
};

// Trainable linear head g on top of the frozen features, pulled toward a
// fixed center c and elastically toward its initial parameters.
struct CenterDistanceHead {
    Matrix weight;           // e x f
    std::vector<double> bias;        // e
    std::vector<double> center;      // e; mean initial head output over the
                                     // training set, fixed afterwards
    Matrix weight0;          // initial weight (frozen copy)
    std::vector<double> bias0;       // initial bias (frozen copy)
};

// PCA subspace with a diagonal Gaussian over the latent coordinates.
struct LatentGaussian {
    std::vector<double> pca_mean;    // D
    Matrix basis;            // m x D; rows orthonormal to 1e-8
    std::vector<double> latent_mean; // m
    std::vector<double> latent_var;  // m; entries >= 1e-6
    // max(sum_j 1/2 log(2 pi var_j), 0): the normalization term after the
    // shift that makes the minimum achievable score nonnegative.
    double nll_floor = 0.0;
};

struct DetectorState {
    DetectorKind kind = DetectorKind::ae_pixel;
    std::size_t side = 0;
    std::uint64_t epoch = 0;
    std::uint64_t seed = 0;
    DetectorConfig config;
    // Only the blocks relevant to `kind` are populated.
    MlpAutoencoder ae;               // ae_pixel, ae_feature
    FeatureExtractor features;       // ae_feature, center_distance
    CenterDistanceHead head;         // center_distance
    LatentGaussian gaussian;         // latent_gaussian
};

// Builds a detector with seeded Glorot-uniform weights (uniform(-s, s) with
// s = sqrt(6/(fan_in+fan_out)), biases zero, drawn layer by layer row-major
// from derive_seed(seed, "init")). center_distance additionally fixes c to
// the mean initial head output over train_samples; latent_gaussian fits its
// PCA basis and latent Gaussian from train_samples and is then training-free.
// Throws ValidationError on an empty training set or infeasible widths and
// DimensionError when patches do not match side.
DetectorState init_detector(DetectorKind kind, std::size_t side,
                            const DetectorConfig& config, std::uint64_t seed,
                            const std::vector<data::Patch>& train_samples);

// One pass of minibatch SGD over train_samples in an order shuffled by
// derive_seed(seed, "shuffle-<epoch>") where <epoch> is the 1-based index of
// the pass being run. Returns the sample-weighted mean batch loss; increments
// state.epoch. For latent_gaussian this is a no-op that returns the mean
// score. Throws DivergenceError naming the epoch when a loss goes non-finite.
double train_epoch(DetectorState& state, const std::vector<data::Patch>& train_samples);

// Anomaly score of one patch; deterministic, never mutates state.
//   ae_pixel:        |x - recon(x)|^2 / D
//   ae_feature:      |phi(x) - phi(recon(x))|^2 / f
//   center_distance: |g(phi(x)) - c|^2
//   latent_gaussian: shifted Gaussian NLL of the latent coordinates plus
//                    residual_weight * |x - pca reconstruction|^2
double score(const DetectorState& state, const data::Patch& patch);

// Scores many patches; the parallel form distributes whole samples across
// threads and is bit-identical to the serial form.
std::vector<double> score_batch(const DetectorState& state,
                                const std::vector<data::Patch>& patches);
std::vector<double> score_batch_serial(const DetectorState& state,
                                       const std::vector<data::Patch>& patches);

// Mean evaluation loss without any update: mean score for the autoencoders
// and latent_gaussian; mean score plus the elastic penalty for
// center_distance (the training objective evaluated in place).
double evaluation_loss(const DetectorState& state,
                       const std::vector<data::Patch>& samples);

// Trainable parameters as one flat vector, in the order gradients are laid
// out: per layer weight row-major then bias for the autoencoders; head weight
// row-major then head bias for center_distance; empty for latent_gaussian.
std::vector<double> flatten_parameters(const DetectorState& state);
void set_parameters(DetectorState& state, std::span<const double> values);

// Full-batch training objective and (when grad is non-null) its gradient in
// flatten_parameters order, without updating the state. This is the exact
// quantity train_epoch descends per minibatch.
double batch_objective(const DetectorState& state,
                       const std::vector<data::Patch>& batch,
                       std::vector<double>* grad);

namespace detail {

// Shared internals, split across translation units by detector family.
FeatureExtractor make_feature_extractor(std::size_t input_dim,
                                        std::size_t feature_dim,
                                        std::uint64_t seed);
void feature_map(const FeatureExtractor& fx, const double* x, double* out);

void ae_init(MlpAutoencoder& ae, std::size_t input_dim,
             const DetectorConfig& config, Rng& rng);
// Reconstruction of one sample (the full forward pass).
void ae_reconstruct(const MlpAutoencoder& ae, const double* x, double* recon);
double ae_sample_score(const DetectorState& state, const double* x);
double ae_objective(const DetectorState& state, const Matrix& batch,
                    std::vector<double>* grad);

void center_init(DetectorState& state, const Matrix& train_matrix, Rng& rng);
double center_sample_score(const DetectorState& state, const double* x);
double center_objective(const DetectorState& state, const Matrix& batch,
                        std::vector<double>* grad);
double center_elastic_penalty(const DetectorState& state);

LatentGaussian fit_latent_gaussian(const Matrix& train_matrix,
                                   std::size_t latent_dim);
double latent_sample_score(const DetectorState& state, const double* x);

// Copies `patches` (validated against side) into a row-per-sample matrix.
Matrix to_matrix(const std::vector<data::Patch>& patches, std::size_t side);
// Objective on an already-assembled batch matrix; the core of both
// batch_objective and train_epoch.
double objective_on_matrix(const DetectorState& state, const Matrix& batch,
                           std::vector<double>* grad);

} // namespace detail

} // namespace adkit::det
