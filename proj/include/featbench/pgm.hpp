#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "featbench/errors.hpp"

namespace featbench {

/// 8-bit grayscale image, pixels in row-major scan order.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
    std::uint8_t& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
};

namespace detail {

// Reads the next whitespace/comment-delimited header token.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

inline std::size_t pgm_number(std::istream& in, const std::string& what) {
    const std::string tok = pgm_token(in);
    if (tok.empty()) throw DataError("pgm: missing " + what + " in header");
    std::size_t value = 0;
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw DataError("pgm: malformed " + what + " '" + tok + "'");
        value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    return value;
}

}  // namespace detail

/// Reads a PGM image (ASCII P2 or binary P5, maxval <= 255).
inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("pgm: cannot open '" + path + "'");
    const std::string magic = detail::pgm_token(in);
    if (magic != "P2" && magic != "P5")
        throw DataError("pgm: '" + path + "' has unsupported magic '" + magic + "'");
    GrayImage img;
    img.width = detail::pgm_number(in, "width");
    img.height = detail::pgm_number(in, "height");
    const std::size_t maxval = detail::pgm_number(in, "maxval");
    if (img.width == 0 || img.height == 0)
        throw DataError("pgm: '" + path + "' declares zero dimensions");
    if (maxval == 0 || maxval > 255)
        throw DataError("pgm: '" + path + "' maxval " + std::to_string(maxval) +
                        " out of supported range [1,255]");
    const std::size_t count = img.width * img.height;
    img.pixels.resize(count);
    if (magic == "P5") {
        // Exactly one whitespace byte separates maxval from the raster.
        in.read(reinterpret_cast<char*>(img.pixels.data()),
                static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count)
            throw DataError("pgm: '" + path + "' pixel data truncated");
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t v = detail::pgm_number(in, "pixel " + std::to_string(i));
            if (v > maxval)
                throw DataError("pgm: '" + path + "' pixel " + std::to_string(i) +
                                " exceeds maxval");
            img.pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

/// Writes a binary (P5) PGM with maxval 255.
inline void save_pgm(const GrayImage& img, const std::string& path) {
    if (img.pixels.size() != img.width * img.height)
        throw DataError("pgm: image pixel buffer does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("pgm: cannot write '" + path + "'");
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw DataError("pgm: write to '" + path + "' failed");
}

}  // namespace featbench
