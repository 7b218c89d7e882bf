#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/kernel.hpp"
#include "featbench/rng.hpp"

namespace featbench {

struct SvmParams {
    double c = 1.0;
    KernelParams kernel{};
    /// KKT violation tolerance for the SMO sweep.
    double tol = 1e-3;
    /// Consecutive violation-free sweeps required before stopping.
    int max_passes = 10;
    std::uint64_t seed = 0;
};

/// One two-class margin machine. Stores only the support vectors;
/// dual_coeffs[s] = alpha_s * y_s for support vector s.
struct BinarySvm {
    std::size_t n_features = 0;
    std::vector<double> support_vectors;  // row-major, one row per SV
    std::vector<double> dual_coeffs;
    double bias = 0.0;
    KernelParams kernel{};

    std::size_t n_support() const { return dual_coeffs.size(); }

    std::span<const double> support_vector(std::size_t s) const {
        return {support_vectors.data() + s * n_features, n_features};
    }

    double decision(std::span<const double> x) const {
        double f = bias;
        for (std::size_t s = 0; s < n_support(); ++s)
            f += dual_coeffs[s] * kernel_eval(kernel, support_vector(s), x);
        return f;
    }
};

/// Binary problems hold one machine; k > 2 classes hold one machine per
/// class (one-vs-rest).
struct SvmModel {
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
    SvmParams params{};
    std::vector<BinarySvm> machines;
};

namespace detail {

struct SmoProblem {
    const std::vector<double>* gram = nullptr;  // n x n kernel matrix
    std::vector<double> y;                      // +1 / -1
    double c = 1.0;
    double tol = 1e-3;
    int max_passes = 10;
};

struct SmoSolution {
    std::vector<double> alpha;
    double bias = 0.0;
};

/// Sequential minimal optimization: the first index of each working pair
/// comes from a sweep over KKT violators; the partner is the point with the
/// largest error gap |E_i - E_j|, falling back to a full scan from a seeded
/// random start when that step cannot move. An error cache keeps every E_k
/// current in O(n) per accepted step.
inline SmoSolution smo_solve(const SmoProblem& p, Rng& rng) {
    const std::size_t n = p.y.size();
    const std::vector<double>& k = *p.gram;
    std::vector<double> alpha(n, 0.0);
    double b = 0.0;
    // f(x_i) = 0 initially, so E_i = -y_i.
    std::vector<double> err(n);
    for (std::size_t i = 0; i < n; ++i) err[i] = -p.y[i];

    const auto take_step = [&](std::size_t i, std::size_t j) {
        const double ei = err[i];
        const double ej = err[j];
        const double ai_old = alpha[i];
        const double aj_old = alpha[j];
        double lo, hi;
        if (p.y[i] != p.y[j]) {
            lo = std::max(0.0, aj_old - ai_old);
            hi = std::min(p.c, p.c + aj_old - ai_old);
        } else {
            lo = std::max(0.0, ai_old + aj_old - p.c);
            hi = std::min(p.c, ai_old + aj_old);
        }
        if (lo >= hi) return false;
        const double eta = 2.0 * k[i * n + j] - k[i * n + i] - k[j * n + j];
        if (eta >= 0.0) return false;
        double aj = aj_old - p.y[j] * (ei - ej) / eta;
        aj = std::min(hi, std::max(lo, aj));
        // Snap to the box; clipping arithmetic otherwise leaves dust-sized
        // alphas that register as violators no step can repair.
        if (aj < 1e-8)
            aj = 0.0;
        else if (aj > p.c - 1e-8)
            aj = p.c;
        if (std::abs(aj - aj_old) < 1e-5) return false;
        double ai = ai_old + p.y[i] * p.y[j] * (aj_old - aj);
        if (ai < 1e-8)
            ai = 0.0;
        else if (ai > p.c - 1e-8)
            ai = p.c;
        alpha[i] = ai;
        alpha[j] = aj;

        const double b1 = b - ei - p.y[i] * (ai - ai_old) * k[i * n + i] -
                          p.y[j] * (aj - aj_old) * k[i * n + j];
        const double b2 = b - ej - p.y[i] * (ai - ai_old) * k[i * n + j] -
                          p.y[j] * (aj - aj_old) * k[j * n + j];
        double b_new;
        if (ai > 0.0 && ai < p.c)
            b_new = b1;
        else if (aj > 0.0 && aj < p.c)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        const double di = p.y[i] * (ai - ai_old);
        const double dj = p.y[j] * (aj - aj_old);
        const double db = b_new - b;
        for (std::size_t t = 0; t < n; ++t)
            err[t] += di * k[i * n + t] + dj * k[j * n + t] + db;
        b = b_new;
        return true;
    };

    int passes = 0;
    while (passes < p.max_passes) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = p.y[i] * err[i];
            if (!((ri < -p.tol && alpha[i] < p.c) || (ri > p.tol && alpha[i] > 0.0))) continue;
            std::size_t j = i;
            double best_gap = -1.0;
            for (std::size_t t = 0; t < n; ++t) {
                if (t == i) continue;
                const double gap = std::abs(err[i] - err[t]);
                if (gap > best_gap) {
                    best_gap = gap;
                    j = t;
                }
            }
            if (take_step(i, j)) {
                ++changed;
                continue;
            }
            const std::size_t start = rng.next_index(n);
            for (std::size_t off = 0; off < n; ++off) {
                const std::size_t t = (start + off) % n;
                if (t == i || t == j) continue;
                if (take_step(i, t)) {
                    ++changed;
                    break;
                }
            }
        }
        passes = changed == 0 ? passes + 1 : 0;
    }

    // The swept bias carries the last accepted pair's local estimate, which
    // can leave a uniform offset on every error. Free alphas pin b exactly
    // (average their implied values); with none, take the midpoint of the
    // interval the bound constraints allow.
    double pinned_sum = 0.0;
    std::size_t pinned = 0;
    double b_lo = -std::numeric_limits<double>::infinity();
    double b_hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double g = b - err[i];  // the bias that puts f(x_i) at y_i
        if (alpha[i] > 0.0 && alpha[i] < p.c) {
            pinned_sum += g;
            ++pinned;
        } else if ((alpha[i] <= 0.0) == (p.y[i] > 0.0)) {
            b_lo = std::max(b_lo, g);
        } else {
            b_hi = std::min(b_hi, g);
        }
    }
    if (pinned > 0)
        b = pinned_sum / static_cast<double>(pinned);
    else if (std::isfinite(b_lo) && std::isfinite(b_hi))
        b = 0.5 * (b_lo + b_hi);
    return {std::move(alpha), b};
}

inline BinarySvm smo_to_machine(const Dataset& train, const SmoProblem& p, const SmoSolution& sol,
                                const KernelParams& kernel) {
    BinarySvm m;
    m.n_features = train.n_cols();
    m.kernel = kernel;
    m.bias = sol.bias;
    for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        if (sol.alpha[i] <= 0.0) continue;
        const auto x = train.row(i);
        m.support_vectors.insert(m.support_vectors.end(), x.begin(), x.end());
        m.dual_coeffs.push_back(sol.alpha[i] * p.y[i]);
    }
    return m;
}

}  // namespace detail

/// Trains on `train`; binary data yields one machine with class 1 positive,
/// k > 2 yields one one-vs-rest machine per class. Gaussian sigma <= 0
/// resolves to the median pairwise training distance before any machine is
/// fit. Requires at least two classes with training samples.
inline SvmModel svm_train(const Dataset& train, const SvmParams& params) {
    if (params.c <= 0.0) throw ConfigError("svm: c must be positive");
    if (params.tol <= 0.0) throw ConfigError("svm: tol must be positive");
    if (params.max_passes < 1) throw ConfigError("svm: max_passes must be >= 1");
    if (train.n_rows() == 0) throw DataError("svm: empty training set");
    const std::size_t n = train.n_rows();
    const std::size_t k = train.n_classes();
    if (k < 2) throw DataError("svm: need at least 2 classes");
    const auto counts = train.class_counts();
    std::size_t present = 0;
    for (std::size_t c = 0; c < k; ++c)
        if (counts[c] > 0) ++present;
    if (present < 2) throw DataError("svm: training data contains fewer than 2 classes");

    const KernelParams kernel = resolve_kernel(params.kernel, train);

    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel_eval(kernel, train.row(i), train.row(j));
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }

    SvmModel model;
    model.n_classes = k;
    model.n_features = train.n_cols();
    model.params = params;
    model.params.kernel = kernel;

    const std::size_t n_machines = k == 2 ? 1 : k;
    for (std::size_t m = 0; m < n_machines; ++m) {
        // Positive class: class 1 for binary data, class m one-vs-rest otherwise.
        const int positive = k == 2 ? 1 : static_cast<int>(m);
        detail::SmoProblem prob;
        prob.gram = &gram;
        prob.c = params.c;
        prob.tol = params.tol;
        prob.max_passes = params.max_passes;
        prob.y.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            prob.y[i] = train.labels[i] == positive ? 1.0 : -1.0;
        Rng rng(mix_seed(params.seed, 0x53564d00ull + m));
        const auto sol = detail::smo_solve(prob, rng);
        model.machines.push_back(detail::smo_to_machine(train, prob, sol, kernel));
    }
    return model;
}

/// Binary: sign of the single decision value, with f <= 0 mapping to class
/// 0. Multiclass: argmax of the one-vs-rest decisions, ties to the lowest
/// class index.
inline int svm_predict_row(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.n_features) throw DataError("svm: feature count mismatch");
    if (model.n_classes == 2) return model.machines[0].decision(x) > 0.0 ? 1 : 0;
    int best = 0;
    double best_f = model.machines[0].decision(x);
    for (std::size_t c = 1; c < model.machines.size(); ++c) {
        const double f = model.machines[c].decision(x);
        if (f > best_f) {
            best_f = f;
            best = static_cast<int>(c);
        }
    }
    return best;
}

inline std::vector<int> svm_predict(const SvmModel& model, const Dataset& data) {
    std::vector<int> out(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i) out[i] = svm_predict_row(model, data.row(i));
    return out;
}

/// Primal weight vector sum_i alpha_i y_i x_i of one machine. Only
/// meaningful for the linear kernel; recursive elimination reads this.
inline std::vector<double> svm_linear_weights(const BinarySvm& m) {
    std::vector<double> w(m.n_features, 0.0);
    for (std::size_t s = 0; s < m.n_support(); ++s) {
        const auto x = m.support_vector(s);
        for (std::size_t f = 0; f < m.n_features; ++f) w[f] += m.dual_coeffs[s] * x[f];
    }
    return w;
}

}  // namespace featbench
