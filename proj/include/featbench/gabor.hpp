#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "featbench/errors.hpp"
#include "featbench/pgm.hpp"

namespace featbench {

/// Oriented sinusoid under a Gaussian envelope, sampled on a centered
/// size x size grid. i is the column offset and j the row offset, so theta 0
/// responds to intensity variation along image columns (vertical stripes).
struct GaborParams {
    double sigma = 1.0;      // envelope width, pixels
    double frequency = 0.1;  // cycles per pixel
    double theta = 0.0;      // radians
    std::size_t size = 7;    // odd side length
    /// Normalization factors resolved by gabor_kernel for unit L2 norm;
    /// values <= 0 mean "resolve".
    double norm_b = 0.0;
    double norm_c = 0.0;
};

struct GaborKernelPair {
    std::size_t size = 0;
    std::vector<double> even;  // cosine kernel, row-major
    std::vector<double> odd;   // sine kernel, row-major
    double b = 0.0;            // resolved even normalization factor
    double c = 0.0;            // resolved odd normalization factor
};

/// Samples the even (cosine) and odd (sine) kernels with the Gaussian
/// envelope exp(-(i^2+j^2) / (2 sigma^2)) and scales each by the factor
/// (B resp. C) that gives it unit L2 norm. A sinusoid phase that makes a
/// kernel vanish on the whole grid cannot be normalized and is rejected.
inline GaborKernelPair gabor_kernel(const GaborParams& p) {
    if (p.sigma <= 0.0) throw ConfigError("gabor: sigma must be positive");
    if (p.frequency <= 0.0) throw ConfigError("gabor: frequency must be positive");
    if (p.size < 1 || p.size % 2 == 0) throw ConfigError("gabor: size must be odd and positive");

    const auto half = static_cast<long>(p.size / 2);
    const double inv_two_sigma_sq = 1.0 / (2.0 * p.sigma * p.sigma);
    const double two_pi_f = 2.0 * 3.14159265358979323846 * p.frequency;
    const double ct = std::cos(p.theta);
    const double st = std::sin(p.theta);

    GaborKernelPair out;
    out.size = p.size;
    out.even.resize(p.size * p.size);
    out.odd.resize(p.size * p.size);
    for (long row = -half; row <= half; ++row) {
        for (long col = -half; col <= half; ++col) {
            const double i = static_cast<double>(col);  // column offset
            const double j = static_cast<double>(row);  // row offset
            const double envelope = std::exp(-(i * i + j * j) * inv_two_sigma_sq);
            const double phase = two_pi_f * (i * ct + j * st);
            const std::size_t idx = static_cast<std::size_t>(row + half) * p.size +
                                    static_cast<std::size_t>(col + half);
            out.even[idx] = envelope * std::cos(phase);
            out.odd[idx] = envelope * std::sin(phase);
        }
    }
    auto normalize = [&](std::vector<double>& k, const char* which) {
        double sq = 0.0;
        for (double v : k) sq += v * v;
        if (sq <= 0.0)
            throw ConfigError(std::string("gabor: ") + which +
                              " kernel vanishes on the sampled grid; cannot normalize");
        const double factor = 1.0 / std::sqrt(sq);
        for (double& v : k) v *= factor;
        return factor;
    };
    out.b = normalize(out.even, "even");
    out.c = normalize(out.odd, "odd");
    return out;
}

/// A filter bank plus a short name per entry (used in dataset column names).
struct GaborBank {
    std::vector<GaborParams> entries;
    std::vector<std::string> names;
};

/// Grid bank over orientations x frequencies, theta-major, named
/// t{a}_f{b}. Sigma and kernel size follow each frequency: sigma = 0.56/f,
/// size = 2*ceil(3*sigma)+1.
inline GaborBank make_gabor_bank(const std::vector<double>& thetas,
                                 const std::vector<double>& frequencies) {
    if (thetas.empty() || frequencies.empty())
        throw ConfigError("gabor: bank needs at least one orientation and one frequency");
    GaborBank bank;
    for (std::size_t a = 0; a < thetas.size(); ++a) {
        for (std::size_t b = 0; b < frequencies.size(); ++b) {
            GaborParams p;
            p.theta = thetas[a];
            p.frequency = frequencies[b];
            p.sigma = 0.56 / p.frequency;
            p.size = 2 * static_cast<std::size_t>(std::ceil(3.0 * p.sigma)) + 1;
            bank.entries.push_back(p);
            bank.names.push_back("t" + std::to_string(a) + "_f" + std::to_string(b));
        }
    }
    return bank;
}

/// 4 orientations {0, pi/4, pi/2, 3pi/4} x 2 frequencies {0.1, 0.25}.
inline GaborBank default_gabor_bank() {
    const double pi = 3.14159265358979323846;
    return make_gabor_bank({0.0, pi / 4.0, pi / 2.0, 3.0 * pi / 4.0}, {0.1, 0.25});
}

/// Flat bank from a parameter list, named k{i}.
inline GaborBank flat_gabor_bank(const std::vector<GaborParams>& entries) {
    GaborBank bank;
    bank.entries = entries;
    for (std::size_t i = 0; i < entries.size(); ++i)
        bank.names.push_back("k" + std::to_string(i));
    return bank;
}

/// Mean and population standard deviation of the magnitude response
/// sqrt(even^2 + odd^2) of one kernel pair over the zero-padded image.
/// Pixel intensities enter as raw 0..255 values.
inline std::pair<double, double> gabor_response_stats(const GrayImage& img,
                                                      const GaborKernelPair& k) {
    if (k.size > img.width || k.size > img.height)
        throw DataError("gabor: kernel size " + std::to_string(k.size) +
                        " exceeds image extent " + std::to_string(img.width) + "x" +
                        std::to_string(img.height));
    const auto half = static_cast<long>(k.size / 2);
    const auto h = static_cast<long>(img.height);
    const auto w = static_cast<long>(img.width);
    double sum = 0.0, sum_sq = 0.0;
    for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
            double even = 0.0, odd = 0.0;
            for (long dr = -half; dr <= half; ++dr) {
                const long rr = r + dr;
                if (rr < 0 || rr >= h) continue;
                const std::size_t krow = static_cast<std::size_t>(dr + half) * k.size;
                for (long dc = -half; dc <= half; ++dc) {
                    const long cc = c + dc;
                    if (cc < 0 || cc >= w) continue;
                    const double pixel =
                        static_cast<double>(img.pixels[static_cast<std::size_t>(rr) * img.width +
                                                       static_cast<std::size_t>(cc)]);
                    const std::size_t idx = krow + static_cast<std::size_t>(dc + half);
                    even += pixel * k.even[idx];
                    odd += pixel * k.odd[idx];
                }
            }
            const double mag = std::sqrt(even * even + odd * odd);
            sum += mag;
            sum_sq += mag * mag;
        }
    }
    const double n = static_cast<double>(img.width * img.height);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    return {mean, std::sqrt(var)};
}

/// Two features (magnitude mean, magnitude standard deviation) per bank
/// entry, in bank order.
inline std::vector<double> gabor_features(const GrayImage& img, const GaborBank& bank) {
    std::vector<double> out;
    out.reserve(bank.entries.size() * 2);
    for (const GaborParams& p : bank.entries) {
        const auto [mean, sd] = gabor_response_stats(img, gabor_kernel(p));
        out.push_back(mean);
        out.push_back(sd);
    }
    return out;
}

}  // namespace featbench
