#include "adkit/checkpoint.hpp"

#include "adkit/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace adkit::det {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'K', '1'};

struct Writer {
    std::vector<std::uint8_t> bytes;

    void raw(const void* src, std::size_t count) {
        const auto* p = static_cast<const std::uint8_t*>(src);
        bytes.insert(bytes.end(), p, p + count);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void doubles(const std::vector<double>& v) {
        for (const double x : v) f64(x);
    }
    void matrix(const Matrix& m) {
        for (const double x : m.a) f64(x);
    }
};

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t count) const {
        if (pos + count > bytes.size())
            throw FormatError("checkpoint: truncated payload");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void doubles(std::vector<double>& v, std::size_t count) {
        v.resize(count);
        for (std::size_t i = 0; i < count; ++i) v[i] = f64();
    }
    void matrix(Matrix& m, std::size_t rows, std::size_t cols) {
        m = Matrix(rows, cols);
        for (double& x : m.a) x = f64();
    }
};

std::uint32_t kind_tag(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::ae_pixel: return 0;
        case DetectorKind::ae_feature: return 1;
        case DetectorKind::center_distance: return 2;
        case DetectorKind::latent_gaussian: return 3;
    }
    throw ValidationError("unknown detector kind value");
}

DetectorKind kind_from_tag(std::uint32_t tag) {
    switch (tag) {
        case 0: return DetectorKind::ae_pixel;
        case 1: return DetectorKind::ae_feature;
        case 2: return DetectorKind::center_distance;
        case 3: return DetectorKind::latent_gaussian;
        default:
            throw FormatError("checkpoint: unsupported detector kind tag " +
                              std::to_string(tag));
    }
}

} // namespace

std::vector<std::uint8_t> snapshot(const DetectorState& state) {
    Writer w;
    w.raw(kMagic, 4);
    w.u32(kind_tag(state.kind));
    w.u64(state.epoch);
    w.u32(static_cast<std::uint32_t>(state.side));
    w.u64(state.seed);
    const auto& c = state.config;
    w.f64(c.learning_rate);
    w.u32(static_cast<std::uint32_t>(c.batch_size));
    w.u32(static_cast<std::uint32_t>(c.hidden1));
    w.u32(static_cast<std::uint32_t>(c.hidden2));
    w.u32(static_cast<std::uint32_t>(c.bottleneck));
    w.u32(static_cast<std::uint32_t>(c.feature_dim));
    w.u32(static_cast<std::uint32_t>(c.embed_dim));
    w.f64(c.lambda_elastic);
    w.u32(static_cast<std::uint32_t>(c.latent_dim));
    w.f64(c.residual_weight);

    switch (state.kind) {
        case DetectorKind::ae_pixel:
        case DetectorKind::ae_feature:
            for (std::size_t l = 0; l < state.ae.weights.size(); ++l) {
                w.matrix(state.ae.weights[l]);
                w.doubles(state.ae.biases[l]);
            }
            if (state.kind == DetectorKind::ae_feature)
                w.matrix(state.features.projection);
            break;
        case DetectorKind::center_distance:
            w.matrix(state.features.projection);
            w.matrix(state.head.weight);
            w.doubles(state.head.bias);
            w.doubles(state.head.center);
            w.matrix(state.head.weight0);
            w.doubles(state.head.bias0);
            break;
        case DetectorKind::latent_gaussian:
            w.doubles(state.gaussian.pca_mean);
            w.matrix(state.gaussian.basis);
            w.doubles(state.gaussian.latent_mean);
            w.doubles(state.gaussian.latent_var);
            w.f64(state.gaussian.nll_floor);
            break;
    }
    return std::move(w.bytes);
}

DetectorState restore(std::span<const std::uint8_t> bytes,
                      std::optional<std::size_t> expected_side) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("checkpoint: bad magic (not a checkpoint)");
    r.pos = 4;

    DetectorState state;
    state.kind = kind_from_tag(r.u32());
    state.epoch = r.u64();
    state.side = r.u32();
    state.seed = r.u64();
    auto& c = state.config;
    c.learning_rate = r.f64();
    c.batch_size = r.u32();
    c.hidden1 = r.u32();
    c.hidden2 = r.u32();
    c.bottleneck = r.u32();
    c.feature_dim = r.u32();
    c.embed_dim = r.u32();
    c.lambda_elastic = r.f64();
    c.latent_dim = r.u32();
    c.residual_weight = r.f64();

    if (state.side == 0) throw FormatError("checkpoint: zero side");
    if (expected_side && state.side != *expected_side)
        throw DimensionError("checkpoint: stored side " + std::to_string(state.side) +
                             " does not match expected side " +
                             std::to_string(*expected_side));
    const std::size_t dim = state.side * state.side;

    switch (state.kind) {
        case DetectorKind::ae_pixel:
        case DetectorKind::ae_feature: {
            auto& ae = state.ae;
            ae.layer_sizes = {dim, c.hidden1, c.hidden2, c.bottleneck,
                              c.hidden2, c.hidden1, dim};
            ae.weights.clear();
            ae.biases.clear();
            for (std::size_t l = 0; l + 1 < ae.layer_sizes.size(); ++l) {
                Matrix w;
                r.matrix(w, ae.layer_sizes[l + 1], ae.layer_sizes[l]);
                ae.weights.push_back(std::move(w));
                std::vector<double> b;
                r.doubles(b, ae.layer_sizes[l + 1]);
                ae.biases.push_back(std::move(b));
            }
            if (state.kind == DetectorKind::ae_feature)
                r.matrix(state.features.projection, c.feature_dim, dim);
            break;
        }
        case DetectorKind::center_distance:
            r.matrix(state.features.projection, c.feature_dim, dim);
            r.matrix(state.head.weight, c.embed_dim, c.feature_dim);
            r.doubles(state.head.bias, c.embed_dim);
            r.doubles(state.head.center, c.embed_dim);
            r.matrix(state.head.weight0, c.embed_dim, c.feature_dim);
            r.doubles(state.head.bias0, c.embed_dim);
            break;
        case DetectorKind::latent_gaussian:
            r.doubles(state.gaussian.pca_mean, dim);
            r.matrix(state.gaussian.basis, c.latent_dim, dim);
            r.doubles(state.gaussian.latent_mean, c.latent_dim);
            r.doubles(state.gaussian.latent_var, c.latent_dim);
            state.gaussian.nll_floor = r.f64();
            break;
    }
    if (r.pos != bytes.size())
        throw FormatError("checkpoint: " + std::to_string(bytes.size() - r.pos) +
                          " unexpected trailing bytes");
    return state;
}

void write_checkpoint(const DetectorState& state, const std::filesystem::path& path) {
    const auto bytes = snapshot(state);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot open for writing " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

DetectorState load_checkpoint(const std::filesystem::path& path,
                              std::optional<std::size_t> expected_side) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return restore(bytes, expected_side);
}

} // namespace adkit::det
