#pragma once

#include "adkit/dataset.hpp"
#include "adkit/patch.hpp"
#include "adkit/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>

namespace adkit {

enum class CohortKind { structural, artifact, density };

const char* to_string(CohortKind kind);
CohortKind parse_cohort_kind(std::string_view token);

namespace data {

struct CohortCounts {
    std::size_t n_train = 0;
    std::size_t n_val_normal = 0;
    std::size_t n_val_abnormal = 0;
    std::size_t n_test_normal = 0;
    std::size_t n_test_abnormal = 0;
};

// Normal texture: three band-limited sinusoid components (amplitude in
// [0.06,0.14], frequency in [1,4] cycles per side, random orientation and
// phase) around a 0.5 base, plus N(0, 0.05^2) pixel noise, clipped to [0,1].
Patch generate_normal_patch(std::size_t side, Rng& rng);

// Bright disk: radius uniform in [side/8, side/4], center placed so the disk
// stays inside the patch, +0.5 intensity, clipped.
void apply_structural_disk(Patch& patch, Rng& rng);

// One corruption per sample, chosen uniformly: Gaussian noise (sigma 0.3),
// 5x5 box blur with clamp-to-edge borders, contrast compression toward 0.5
// by factor 0.4, or a black occlusion square of side/4. Returns the index of
// the chosen corruption (0..3).
int apply_artifact_corruption(Patch& patch, Rng& rng);

// Fisher-Yates permutation of the pixel array: marginal moments are
// preserved exactly while spatial correlation is destroyed.
void apply_density_permutation(Patch& patch, Rng& rng);

// Generates a full synthetic cohort into `out_dir`: PGM patches plus
// manifest.csv. Deterministic in all arguments: one xoshiro256** stream
// seeded from `seed`, samples drawn in manifest order (train, val normal,
// val abnormal, test normal, test abnormal). Pseudo-patients group 10
// consecutive samples within each role. Throws ValidationError if side < 16
// or if either test count is zero.
Dataset generate_synthetic_cohort(CohortKind kind, const CohortCounts& counts,
                                  std::size_t side, std::uint64_t seed,
                                  const std::filesystem::path& out_dir);

} // namespace data
} // namespace adkit
