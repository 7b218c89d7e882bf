#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "featbench/errors.hpp"
#include "featbench/pgm.hpp"

namespace featbench {

/// Offset is (di, dj) = (row delta, column delta).
struct GlcmParams {
    std::size_t levels = 8;
    std::vector<std::pair<int, int>> offsets{{0, 1}, {1, 1}, {1, 0}, {1, -1}};
    bool symmetric = true;
    bool normalize = true;
};

struct Glcm {
    std::size_t levels = 0;
    std::vector<double> matrix;  // levels x levels, row-major
    bool normalized = false;

    double at(std::size_t i, std::size_t j) const { return matrix[i * levels + j]; }
    double& at(std::size_t i, std::size_t j) { return matrix[i * levels + j]; }
};

/// Quantizes a pixel to one of `levels` equal-width bins of [0, 255].
inline std::size_t glcm_quantize(std::uint8_t pixel, std::size_t levels) {
    const std::size_t bin = static_cast<std::size_t>(pixel) * levels / 256;
    return std::min(bin, levels - 1);
}

/// One co-occurrence matrix per offset: counts of ordered quantized pixel
/// pairs (p, p at +offset) that fall inside the image. Symmetric mode adds
/// the transpose; normalize divides by the total count. An offset that
/// yields zero in-bounds pairs is an error.
inline std::vector<Glcm> glcm_compute(const GrayImage& img, const GlcmParams& p) {
    if (img.width == 0 || img.height == 0) throw DataError("glcm: empty image");
    if (p.levels < 2 || p.levels > 256) throw ConfigError("glcm: levels must be in [2, 256]");
    if (p.offsets.empty()) throw ConfigError("glcm: need at least one offset");
    for (const auto& [di, dj] : p.offsets)
        if (di == 0 && dj == 0) throw ConfigError("glcm: zero offset");

    const std::size_t L = p.levels;
    std::vector<std::size_t> quant(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        quant[i] = glcm_quantize(img.pixels[i], L);

    std::vector<Glcm> out;
    out.reserve(p.offsets.size());
    const auto h = static_cast<long>(img.height);
    const auto w = static_cast<long>(img.width);
    for (std::size_t o = 0; o < p.offsets.size(); ++o) {
        const long di = p.offsets[o].first;
        const long dj = p.offsets[o].second;
        Glcm g;
        g.levels = L;
        g.matrix.assign(L * L, 0.0);
        double total = 0.0;
        for (long r = 0; r < h; ++r) {
            const long r2 = r + di;
            if (r2 < 0 || r2 >= h) continue;
            for (long c = 0; c < w; ++c) {
                const long c2 = c + dj;
                if (c2 < 0 || c2 >= w) continue;
                const std::size_t a = quant[static_cast<std::size_t>(r) * img.width +
                                            static_cast<std::size_t>(c)];
                const std::size_t b = quant[static_cast<std::size_t>(r2) * img.width +
                                            static_cast<std::size_t>(c2)];
                g.at(a, b) += 1.0;
                total += 1.0;
            }
        }
        if (total == 0.0)
            throw DataError("glcm: offset (" + std::to_string(di) + "," + std::to_string(dj) +
                            ") yields no pixel pairs in a " + std::to_string(img.width) + "x" +
                            std::to_string(img.height) + " image");
        if (p.symmetric) {
            for (std::size_t i = 0; i < L; ++i) {
                for (std::size_t j = i + 1; j < L; ++j) {
                    const double s = g.at(i, j) + g.at(j, i);
                    g.at(i, j) = s;
                    g.at(j, i) = s;
                }
                g.at(i, i) *= 2.0;
            }
            total *= 2.0;
        }
        if (p.normalize) {
            for (double& v : g.matrix) v /= total;
            g.normalized = true;
        }
        out.push_back(std::move(g));
    }
    return out;
}

/// Names of the five texture statistics in emission order.
inline const std::vector<std::string>& haralick_names() {
    static const std::vector<std::string> names{"contrast", "correlation", "energy",
                                                "homogeneity", "entropy"};
    return names;
}

/// Contrast, correlation, energy, homogeneity, entropy of a normalized
/// co-occurrence matrix. Entropy uses the natural log with 0 log 0 = 0;
/// correlation is 0 by convention when a marginal variance vanishes.
inline std::vector<double> haralick_features(const Glcm& g) {
    double total = 0.0;
    for (double v : g.matrix) total += v;
    if (std::abs(total - 1.0) > 1e-6)
        throw DataError("haralick: matrix is not normalized (sum " + std::to_string(total) + ")");

    const std::size_t L = g.levels;
    std::vector<double> pi(L, 0.0), pj(L, 0.0);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            pi[i] += g.at(i, j);
            pj[j] += g.at(i, j);
        }
    double mu_i = 0.0, mu_j = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        mu_i += static_cast<double>(i) * pi[i];
        mu_j += static_cast<double>(i) * pj[i];
    }
    double var_i = 0.0, var_j = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        var_i += (static_cast<double>(i) - mu_i) * (static_cast<double>(i) - mu_i) * pi[i];
        var_j += (static_cast<double>(i) - mu_j) * (static_cast<double>(i) - mu_j) * pj[i];
    }

    double contrast = 0.0, corr = 0.0, energy = 0.0, homogeneity = 0.0, entropy = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < L; ++j) {
            const double v = g.at(i, j);
            const double diff = static_cast<double>(i) - static_cast<double>(j);
            contrast += diff * diff * v;
            corr += (static_cast<double>(i) - mu_i) * (static_cast<double>(j) - mu_j) * v;
            energy += v * v;
            homogeneity += v / (1.0 + diff * diff);
            if (v > 0.0) entropy -= v * std::log(v);
        }
    }
    const double denom = std::sqrt(var_i) * std::sqrt(var_j);
    corr = denom > 0.0 ? corr / denom : 0.0;
    return {contrast, corr, energy, homogeneity, entropy};
}

}  // namespace featbench
