#include "adkit/cohort.hpp"

#include "adkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace adkit {

const char* to_string(CohortKind kind) {
    switch (kind) {
    case CohortKind::structural: return "structural";
    case CohortKind::artifact: return "artifact";
    default: return "density";
    }
}

CohortKind parse_cohort_kind(std::string_view token) {
    if (token == "structural") return CohortKind::structural;
    if (token == "artifact") return CohortKind::artifact;
    if (token == "density") return CohortKind::density;
    throw ParseError("unknown cohort kind '" + std::string(token) + "'");
}

namespace data {

namespace {

inline double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void clip_patch(Patch& patch) {
    for (double& p : patch.pixels) p = clip01(p);
}

} // namespace

Patch generate_normal_patch(std::size_t side, Rng& rng) {
    // Each component picks its wave vector from a small discrete band, so the
    // noise-free textures span a fixed 25-dimensional linear space (two phase
    // dims per frequency/orientation pair plus the DC level). Random phases
    // and amplitudes move patches inside that space; abnormalities are what
    // move them out of it.
    constexpr int components = 3;
    constexpr double freq_band[] = {1.5, 2.5, 3.5};
    constexpr double orientations[] = {0.0, std::numbers::pi / 4.0,
                                       std::numbers::pi / 2.0,
                                       3.0 * std::numbers::pi / 4.0};
    double amp[components], freq[components], ori[components], phase[components];
    for (int k = 0; k < components; ++k) {
        amp[k] = rng.uniform(0.06, 0.14);
        freq[k] = freq_band[rng.below(3)];
        ori[k] = orientations[rng.below(4)];
        phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    Patch patch(side, side);
    const double inv = 1.0 / static_cast<double>(side);
    for (std::size_t y = 0; y < side; ++y) {
        for (std::size_t x = 0; x < side; ++x) {
            double v = 0.5;
            for (int k = 0; k < components; ++k) {
                const double u = (static_cast<double>(x) * std::cos(ori[k]) +
                                  static_cast<double>(y) * std::sin(ori[k])) * inv;
                v += amp[k] * std::sin(2.0 * std::numbers::pi * freq[k] * u + phase[k]);
            }
            patch.at(x, y) = v;
        }
    }
    for (double& p : patch.pixels) p += rng.gaussian(0.0, 0.05);
    clip_patch(patch);
    return patch;
}

void apply_structural_disk(Patch& patch, Rng& rng) {
    const double side = static_cast<double>(patch.width);
    const double radius = rng.uniform(side / 8.0, side / 4.0);
    const double cx = rng.uniform(radius, side - 1.0 - radius);
    const double cy = rng.uniform(radius, side - 1.0 - radius);
    const double r2 = radius * radius;
    for (std::size_t y = 0; y < patch.height; ++y) {
        for (std::size_t x = 0; x < patch.width; ++x) {
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            if (dx * dx + dy * dy <= r2) patch.at(x, y) += 0.5;
        }
    }
    clip_patch(patch);
}

int apply_artifact_corruption(Patch& patch, Rng& rng) {
    const int choice = static_cast<int>(rng.below(4));
    switch (choice) {
    case 0: // heavy Gaussian noise
        for (double& p : patch.pixels) p += rng.gaussian(0.0, 0.3);
        break;
    case 1: { // 5x5 box blur, clamp-to-edge
        const auto w = static_cast<long>(patch.width);
        const auto h = static_cast<long>(patch.height);
        std::vector<double> src = patch.pixels;
        for (long y = 0; y < h; ++y) {
            for (long x = 0; x < w; ++x) {
                double acc = 0.0;
                for (long dy = -2; dy <= 2; ++dy) {
                    const long yy = std::clamp(y + dy, 0L, h - 1);
                    for (long dx = -2; dx <= 2; ++dx) {
                        const long xx = std::clamp(x + dx, 0L, w - 1);
                        acc += src[static_cast<std::size_t>(yy * w + xx)];
                    }
                }
                patch.pixels[static_cast<std::size_t>(y * w + x)] = acc / 25.0;
            }
        }
        break;
    }
    case 2: // contrast compression toward 0.5
        for (double& p : patch.pixels) p = 0.5 + 0.4 * (p - 0.5);
        break;
    default: { // black occlusion square of side/4
        const std::size_t sq = patch.width / 4;
        const std::size_t x0 = static_cast<std::size_t>(rng.below(patch.width - sq + 1));
        const std::size_t y0 = static_cast<std::size_t>(rng.below(patch.height - sq + 1));
        for (std::size_t y = y0; y < y0 + sq; ++y)
            for (std::size_t x = x0; x < x0 + sq; ++x) patch.at(x, y) = 0.0;
        break;
    }
    }
    clip_patch(patch);
    return choice;
}

void apply_density_permutation(Patch& patch, Rng& rng) {
    rng.shuffle(patch.pixels);
}

namespace {

void apply_abnormality(CohortKind kind, Patch& patch, Rng& rng) {
    switch (kind) {
    case CohortKind::structural: apply_structural_disk(patch, rng); break;
    case CohortKind::artifact: apply_artifact_corruption(patch, rng); break;
    case CohortKind::density: apply_density_permutation(patch, rng); break;
    }
}

std::string sample_name(const char* role, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04zu.pgm", role, index);
    return buf;
}

} // namespace

Dataset generate_synthetic_cohort(CohortKind kind, const CohortCounts& counts,
                                  std::size_t side, std::uint64_t seed,
                                  const std::filesystem::path& out_dir) {
    if (side < 16)
        throw ValidationError("generate_synthetic_cohort: side must be >= 16");
    if (counts.n_test_normal == 0 || counts.n_test_abnormal == 0)
        throw ValidationError("generate_synthetic_cohort: test normal and abnormal "
                              "counts must be positive (AUC undefined otherwise)");

    std::filesystem::create_directories(out_dir);
    Rng rng(seed);
    Dataset dataset;
    dataset.name = to_string(kind);

    struct Role {
        const char* prefix;
        std::size_t count;
        Label label;
        Split split;
        bool abnormal;
    };
    const Role roles[] = {
        {"tr", counts.n_train, Label::normal, Split::train, false},
        {"vn", counts.n_val_normal, Label::normal, Split::val, false},
        {"va", counts.n_val_abnormal, Label::abnormal, Split::val, true},
        {"sn", counts.n_test_normal, Label::normal, Split::test, false},
        {"sa", counts.n_test_abnormal, Label::abnormal, Split::test, true},
    };

    for (const auto& role : roles) {
        for (std::size_t i = 0; i < role.count; ++i) {
            Patch patch = generate_normal_patch(side, rng);
            if (role.abnormal) apply_abnormality(kind, patch, rng);
            const std::string name = sample_name(role.prefix, i);
            write_patch(patch, out_dir / name);
            ManifestRecord rec;
            rec.path = name;
            rec.label = role.label;
            rec.patient_id = std::string(role.prefix) + "_p" + std::to_string(i / 10);
            rec.split = role.split;
            dataset.records.push_back(std::move(rec));
        }
    }

    save_manifest(dataset, out_dir / "manifest.csv");
    validate_dataset(dataset);
    return dataset;
}

} // namespace data
} // namespace adkit
