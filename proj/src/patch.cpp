#include "adkit/patch.hpp"

#include "adkit/errors.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

namespace adkit {

void validate_patch(const Patch& patch) {
    if (patch.width == 0 || patch.height == 0)
        throw ValidationError("patch: width and height must be positive");
    if (patch.pixels.size() != patch.width * patch.height)
        throw ValidationError("patch: pixel count does not match dimensions");
    for (const double p : patch.pixels)
        if (!(p >= 0.0 && p <= 1.0))
            throw ValidationError("patch: pixel outside [0,1]");
}

namespace data {

namespace {

bool is_pgm_ws(int c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

// Reads digits up to the next single whitespace separator.
unsigned long read_header_int(std::istream& in, const char* field) {
    std::string tok;
    int c = in.get();
    while (c != EOF && !is_pgm_ws(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c == EOF || tok.empty())
        throw FormatError(std::string("pgm: malformed header field '") + field + "'");
    for (const char d : tok)
        if (d < '0' || d > '9')
            throw FormatError(std::string("pgm: non-numeric header field '") + field + "'");
    return std::stoul(tok);
}

} // namespace

Patch read_patch(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("pgm: cannot open " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw FormatError("pgm: unsupported magic (want P5)");
    if (!is_pgm_ws(in.get()))
        throw FormatError("pgm: malformed header field 'magic'");

    const unsigned long width = read_header_int(in, "width");
    const unsigned long height = read_header_int(in, "height");
    const unsigned long maxval = read_header_int(in, "maxval");
    if (width == 0) throw FormatError("pgm: width must be positive");
    if (height == 0) throw FormatError("pgm: height must be positive");
    if (maxval != 255) throw FormatError("pgm: maxval must be 255");

    Patch patch(width, height);
    std::vector<std::uint8_t> bytes(patch.size());
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw FormatError("pgm: truncated payload");
    if (in.get() != EOF)
        throw FormatError("pgm: trailing data after payload");

    for (std::size_t i = 0; i < bytes.size(); ++i)
        patch.pixels[i] = static_cast<double>(bytes[i]) / 255.0;
    return patch;
}

void write_patch(const Patch& patch, const std::filesystem::path& path) {
    validate_patch(patch);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("pgm: cannot open for writing " + path.string());

    out << "P5\n" << patch.width << " " << patch.height << "\n255\n";
    std::vector<std::uint8_t> bytes(patch.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double level = std::floor(patch.pixels[i] * 255.0 + 0.5);
        bytes[i] = static_cast<std::uint8_t>(level < 0.0 ? 0.0 : (level > 255.0 ? 255.0 : level));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("pgm: write failed for " + path.string());
}

} // namespace data
} // namespace adkit
