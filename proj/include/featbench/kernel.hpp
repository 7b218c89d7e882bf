#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"

namespace featbench {

enum class KernelKind { linear, gaussian };

struct KernelParams {
    KernelKind kind = KernelKind::linear;
    /// Gaussian width. <= 0 means "resolve at training time to the median
    /// pairwise distance of the training samples".
    double sigma = 0.0;
};

inline std::string kernel_name(const KernelParams& k) {
    return k.kind == KernelKind::linear ? "linear" : "gaussian";
}

/// Linear: dot product. Gaussian: exp(-|x-y|^2 / (2 sigma^2)).
inline double kernel_eval(const KernelParams& k, std::span<const double> x,
                          std::span<const double> y) {
    if (x.size() != y.size())
        throw DataError("kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
    if (k.kind == KernelKind::linear) {
        double dot = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
        return dot;
    }
    if (k.sigma <= 0.0) throw ConfigError("kernel: gaussian sigma must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sq += d * d;
    }
    return std::exp(-sq / (2.0 * k.sigma * k.sigma));
}

/// Median Euclidean distance over all sample pairs; the default gaussian
/// width. Falls back to 1.0 when every pair coincides.
inline double median_pairwise_distance(const Dataset& d) {
    const std::size_t n = d.n_rows();
    if (n < 2) return 1.0;
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = d.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto xj = d.row(j);
            double sq = 0.0;
            for (std::size_t f = 0; f < xi.size(); ++f) {
                const double diff = xi[f] - xj[f];
                sq += diff * diff;
            }
            dist.push_back(std::sqrt(sq));
        }
    }
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    const double med = dist[mid];
    return med > 0.0 ? med : 1.0;
}

/// Returns params with an auto (<= 0) gaussian sigma replaced by the median
/// pairwise distance of `train`.
inline KernelParams resolve_kernel(const KernelParams& k, const Dataset& train) {
    KernelParams out = k;
    if (out.kind == KernelKind::gaussian && out.sigma <= 0.0)
        out.sigma = median_pairwise_distance(train);
    return out;
}

}  // namespace featbench
