#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"

namespace featbench {

/// Gaussian naive Bayes has no tunable hyperparameters; the struct exists so
/// classifier specs stay uniform.
struct NbParams {
    bool operator==(const NbParams&) const = default;
};

/// Gaussian naive Bayes. Variances are population variances raised by the
/// smoothing floor, so every stored variance is >= the floor.
struct NbModel {
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
    std::vector<double> log_priors;  // k; -inf for classes absent from training
    std::vector<double> means;       // k x d, row-major by class
    std::vector<double> variances;   // k x d, floored
    double variance_floor = 0.0;
};

/// Floor = 1e-9 times the largest per-feature variance of the training set,
/// or 1e-12 when every feature is constant.
inline NbModel nb_train(const Dataset& train) {
    if (train.n_rows() == 0) throw DataError("nb: empty training set");
    if (train.n_classes() == 0) throw DataError("nb: dataset has no label names");
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_cols();
    const std::size_t k = train.n_classes();

    double max_var = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += train.at(r, f);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double diff = train.at(r, f) - mean;
            var += diff * diff;
        }
        max_var = std::max(max_var, var / static_cast<double>(n));
    }
    const double floor = max_var > 0.0 ? 1e-9 * max_var : 1e-12;

    NbModel m;
    m.n_classes = k;
    m.n_features = d;
    m.variance_floor = floor;
    m.log_priors.assign(k, -std::numeric_limits<double>::infinity());
    m.means.assign(k * d, 0.0);
    m.variances.assign(k * d, floor);

    const auto counts = train.class_counts();
    for (std::size_t r = 0; r < n; ++r) {
        const auto c = static_cast<std::size_t>(train.labels[r]);
        for (std::size_t f = 0; f < d; ++f) m.means[c * d + f] += train.at(r, f);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        m.log_priors[c] =
            std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
        for (std::size_t f = 0; f < d; ++f) m.means[c * d + f] /= static_cast<double>(counts[c]);
    }
    for (std::size_t r = 0; r < n; ++r) {
        const auto c = static_cast<std::size_t>(train.labels[r]);
        for (std::size_t f = 0; f < d; ++f) {
            const double diff = train.at(r, f) - m.means[c * d + f];
            m.variances[c * d + f] += diff * diff / static_cast<double>(counts[c]);
        }
    }
    return m;
}

/// Unnormalized log posteriors: log prior + sum of per-feature Gaussian
/// log likelihoods.
inline std::vector<double> nb_log_posterior(const NbModel& m, std::span<const double> x) {
    if (x.size() != m.n_features) throw DataError("nb: feature count mismatch");
    constexpr double kLogTwoPi = 1.8378770664093453;
    std::vector<double> lp(m.n_classes);
    for (std::size_t c = 0; c < m.n_classes; ++c) {
        double v = m.log_priors[c];
        if (std::isinf(v)) {
            lp[c] = v;
            continue;
        }
        for (std::size_t f = 0; f < m.n_features; ++f) {
            const double var = m.variances[c * m.n_features + f];
            const double diff = x[f] - m.means[c * m.n_features + f];
            v -= 0.5 * (kLogTwoPi + std::log(var) + diff * diff / var);
        }
        lp[c] = v;
    }
    return lp;
}

/// Posterior distribution over classes (nonnegative, sums to 1).
inline std::vector<double> nb_predict_proba_row(const NbModel& m, std::span<const double> x) {
    std::vector<double> lp = nb_log_posterior(m, x);
    const double top = *std::max_element(lp.begin(), lp.end());
    double total = 0.0;
    for (double& v : lp) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : lp) v /= total;
    return lp;
}

/// Argmax posterior, ties to the lowest class index.
inline int nb_predict_row(const NbModel& m, std::span<const double> x) {
    const std::vector<double> lp = nb_log_posterior(m, x);
    int best = 0;
    for (std::size_t c = 1; c < lp.size(); ++c)
        if (lp[c] > lp[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

inline std::vector<int> nb_predict(const NbModel& m, const Dataset& data) {
    std::vector<int> out(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i) out[i] = nb_predict_row(m, data.row(i));
    return out;
}

}  // namespace featbench
