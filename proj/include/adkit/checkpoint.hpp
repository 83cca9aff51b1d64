#pragma once

#include "adkit/detector.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace adkit::det {

// Checkpoint byte layout (all integers and doubles little-endian):
//
//   "ADK1"            4-byte magic
//   u32  kind         0 ae_pixel, 1 ae_feature, 2 center_distance,
//                     3 latent_gaussian
//   u64  epoch
//   u32  side
//   u64  seed
//   f64  learning_rate
//   u32  batch_size
//   u32  hidden1, hidden2, bottleneck, feature_dim, embed_dim
//   f64  lambda_elastic
//   u32  latent_dim
//   f64  residual_weight
//   f64[] parameter blocks, kind-specific order:
//     ae_pixel:        per layer, weight row-major then bias
//     ae_feature:      autoencoder blocks, then projection row-major
//     center_distance: projection, head weight, head bias, center,
//                      initial weight, initial bias
//     latent_gaussian: pca_mean, basis row-major, latent_mean, latent_var,
//                      nll_floor
//
// The parameter byte count is fully determined by the header, and restore
// rejects any size mismatch. Round-trips are bit-exact.

std::vector<std::uint8_t> snapshot(const DetectorState& state);

// Rebuilds a detector from checkpoint bytes. Throws FormatError on a bad
// magic, kind tag, or truncated/oversized payload, and DimensionError when
// expected_side is given and does not match the stored side.
DetectorState restore(std::span<const std::uint8_t> bytes,
                      std::optional<std::size_t> expected_side = std::nullopt);

void write_checkpoint(const DetectorState& state, const std::filesystem::path& path);
DetectorState load_checkpoint(const std::filesystem::path& path,
                              std::optional<std::size_t> expected_side = std::nullopt);

} // namespace adkit::det
