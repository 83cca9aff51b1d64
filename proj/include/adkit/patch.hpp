#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace adkit {

// A normalized grayscale image patch. Pixels are row-major in [0,1].
struct Patch {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    Patch() = default;
    Patch(std::size_t w, std::size_t h)
        : width(w), height(h), pixels(w * h, 0.0) {}

    std::size_t size() const { return pixels.size(); }
    double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

// Throws ValidationError unless dimensions match the pixel count and every
// value is inside [0,1].
void validate_patch(const Patch& patch);

namespace data {

using adkit::Patch; // patches flow through the data-loading API

// Reads a binary PGM (P5) file with maxval 255. Header tokens must be
// separated by single whitespace characters and comments are rejected.
// Pixel bytes are divided by 255. Throws FormatError naming the offending
// field, or IoError if the file cannot be opened.
Patch read_patch(const std::filesystem::path& path);

// Writes `patch` as binary PGM (P5, maxval 255). Values are quantized by
// round-half-up to the nearest /255 level, so read_patch(write_patch(p))
// reproduces the quantized pixels exactly and repeated writes are
// byte-identical. Throws IoError on failure.
void write_patch(const Patch& patch, const std::filesystem::path& path);

} // namespace data
} // namespace adkit
