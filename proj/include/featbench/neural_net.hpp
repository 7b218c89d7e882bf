#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/rng.hpp"

namespace featbench {

struct NnParams {
    std::size_t hidden = 16;
    double lr = 0.01;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
};

/// One-hidden-layer network: sigmoid hidden units, softmax output trained
/// with cross-entropy. Weight layout is row-major (one row per destination
/// unit).
struct NnModel {
    std::size_t n_inputs = 0;
    std::size_t n_hidden = 0;
    std::size_t n_outputs = 0;
    std::vector<double> w1;  // n_hidden x n_inputs
    std::vector<double> b1;  // n_hidden
    std::vector<double> w2;  // n_outputs x n_hidden
    std::vector<double> b2;  // n_outputs
    std::string activation = "sigmoid";
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Forward pass for one sample; fills hidden activations and the softmax
/// output distribution.
inline void nn_forward(const NnModel& m, std::span<const double> x, std::vector<double>& hidden,
                       std::vector<double>& probs) {
    hidden.resize(m.n_hidden);
    for (std::size_t h = 0; h < m.n_hidden; ++h) {
        double z = m.b1[h];
        const double* row = m.w1.data() + h * m.n_inputs;
        for (std::size_t i = 0; i < m.n_inputs; ++i) z += row[i] * x[i];
        hidden[h] = sigmoid(z);
    }
    probs.resize(m.n_outputs);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < m.n_outputs; ++o) {
        double z = m.b2[o];
        const double* row = m.w2.data() + o * m.n_hidden;
        for (std::size_t h = 0; h < m.n_hidden; ++h) z += row[h] * hidden[h];
        probs[o] = z;
        top = std::max(top, z);
    }
    double total = 0.0;
    for (double& p : probs) {
        p = std::exp(p - top);
        total += p;
    }
    for (double& p : probs) p /= total;
}

struct NnGradients {
    std::vector<double> w1, b1, w2, b2;

    explicit NnGradients(const NnModel& m)
        : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0), b2(m.b2.size(), 0.0) {}
};

/// Accumulates the cross-entropy gradient of one sample into `g` and returns
/// the sample's loss -log p[label].
inline double nn_backward_sample(const NnModel& m, std::span<const double> x, int label,
                                 NnGradients& g, std::vector<double>& hidden,
                                 std::vector<double>& probs) {
    nn_forward(m, x, hidden, probs);
    const double loss = -std::log(probs[static_cast<std::size_t>(label)]);
    // Softmax + cross-entropy: dL/dz2 = p - onehot(label).
    for (std::size_t o = 0; o < m.n_outputs; ++o) {
        const double dz = probs[o] - (static_cast<int>(o) == label ? 1.0 : 0.0);
        g.b2[o] += dz;
        double* grow = g.w2.data() + o * m.n_hidden;
        for (std::size_t h = 0; h < m.n_hidden; ++h) grow[h] += dz * hidden[h];
    }
    for (std::size_t h = 0; h < m.n_hidden; ++h) {
        double dh = 0.0;
        for (std::size_t o = 0; o < m.n_outputs; ++o) {
            const double dz = probs[o] - (static_cast<int>(o) == label ? 1.0 : 0.0);
            dh += m.w2[o * m.n_hidden + h] * dz;
        }
        const double da = dh * hidden[h] * (1.0 - hidden[h]);
        g.b1[h] += da;
        double* grow = g.w1.data() + h * m.n_inputs;
        for (std::size_t i = 0; i < m.n_inputs; ++i) grow[i] += da * x[i];
    }
    return loss;
}

}  // namespace detail

/// All parameters start uniform in (-0.5, 0.5), drawn in the fixed order
/// w1 row-major, b1, w2 row-major, b2.
inline NnModel nn_init(std::size_t n_inputs, std::size_t n_hidden, std::size_t n_outputs,
                       std::uint64_t seed) {
    NnModel m;
    m.n_inputs = n_inputs;
    m.n_hidden = n_hidden;
    m.n_outputs = n_outputs;
    m.w1.resize(n_hidden * n_inputs);
    m.b1.resize(n_hidden);
    m.w2.resize(n_outputs * n_hidden);
    m.b2.resize(n_outputs);
    Rng rng(seed);
    for (double& v : m.w1) v = rng.next_uniform(-0.5, 0.5);
    for (double& v : m.b1) v = rng.next_uniform(-0.5, 0.5);
    for (double& v : m.w2) v = rng.next_uniform(-0.5, 0.5);
    for (double& v : m.b2) v = rng.next_uniform(-0.5, 0.5);
    return m;
}

/// Full-batch gradient descent on the mean cross-entropy. Each epoch checks
/// the batch loss before stepping and reports the epoch if it turns
/// non-finite.
inline NnModel nn_train(const Dataset& train, const NnParams& params) {
    if (params.hidden < 1) throw ConfigError("nn: hidden must be >= 1");
    if (params.lr <= 0.0) throw ConfigError("nn: lr must be positive");
    if (train.n_rows() == 0) throw DataError("nn: empty training set");
    if (train.n_classes() < 2) throw DataError("nn: need at least 2 classes");
    const std::size_t n = train.n_rows();
    NnModel m = nn_init(train.n_cols(), params.hidden, train.n_classes(), params.seed);

    std::vector<double> hidden, probs;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        detail::NnGradients g(m);
        double loss = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            loss += detail::nn_backward_sample(m, train.row(r), train.labels[r], g, hidden, probs);
        loss /= static_cast<double>(n);
        if (!std::isfinite(loss))
            throw std::runtime_error("nn: non-finite loss at epoch " + std::to_string(epoch));
        const double scale = params.lr / static_cast<double>(n);
        for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1[i] -= scale * g.w1[i];
        for (std::size_t i = 0; i < m.b1.size(); ++i) m.b1[i] -= scale * g.b1[i];
        for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2[i] -= scale * g.w2[i];
        for (std::size_t i = 0; i < m.b2.size(); ++i) m.b2[i] -= scale * g.b2[i];
    }
    return m;
}

inline std::vector<double> nn_predict_proba_row(const NnModel& m, std::span<const double> x) {
    if (x.size() != m.n_inputs) throw DataError("nn: feature count mismatch");
    std::vector<double> hidden, probs;
    detail::nn_forward(m, x, hidden, probs);
    return probs;
}

/// Argmax of the output distribution, ties to the lowest class index.
inline int nn_predict_row(const NnModel& m, std::span<const double> x) {
    const std::vector<double> probs = nn_predict_proba_row(m, x);
    int best = 0;
    for (std::size_t o = 1; o < probs.size(); ++o)
        if (probs[o] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(o);
    return best;
}

inline std::vector<int> nn_predict(const NnModel& m, const Dataset& data) {
    std::vector<int> out(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i) out[i] = nn_predict_row(m, data.row(i));
    return out;
}

/// Compares the backpropagated gradient of the single-sample loss against
/// central finite differences (step 1e-5) over every parameter and returns
/// the largest relative error |a - n| / max(|a| + |n|, 1e-8).
inline double nn_gradient_check(const NnModel& model, std::span<const double> x, int label) {
    if (x.size() != model.n_inputs) throw DataError("nn: feature count mismatch");
    if (label < 0 || static_cast<std::size_t>(label) >= model.n_outputs)
        throw DataError("nn: label out of range");
    NnModel m = model;
    std::vector<double> hidden, probs;
    detail::NnGradients g(m);
    detail::nn_backward_sample(m, x, label, g, hidden, probs);

    const double step = 1e-5;
    double worst = 0.0;
    auto check_block = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double saved = params[i];
            params[i] = saved + step;
            detail::nn_forward(m, x, hidden, probs);
            const double up = -std::log(probs[static_cast<std::size_t>(label)]);
            params[i] = saved - step;
            detail::nn_forward(m, x, hidden, probs);
            const double down = -std::log(probs[static_cast<std::size_t>(label)]);
            params[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double rel = std::abs(analytic[i] - numeric) /
                               std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-8);
            worst = std::max(worst, rel);
        }
    };
    check_block(m.w1, g.w1);
    check_block(m.b1, g.b1);
    check_block(m.w2, g.w2);
    check_block(m.b2, g.b2);
    return worst;
}

}  // namespace featbench
