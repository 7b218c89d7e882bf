#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/kernel.hpp"
#include "featbench/svm.hpp"

namespace featbench {

/// Per-feature relevance scores; `higher_is_better` says which end of the
/// scale marks relevance.
struct FeatureScores {
    std::vector<double> scores;
    std::string method;
    bool higher_is_better = true;
};

/// Feature subset as one flag per feature.
struct FeatureMask {
    std::vector<std::uint8_t> bits;

    bool operator==(const FeatureMask&) const = default;

    std::size_t size() const { return bits.size(); }

    std::size_t count() const {
        std::size_t c = 0;
        for (std::uint8_t b : bits) c += b != 0;
        return c;
    }

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) out.push_back(i);
        return out;
    }
};

inline FeatureMask mask_from_indices(std::size_t d, const std::vector<std::size_t>& idx) {
    FeatureMask m;
    m.bits.assign(d, 0);
    for (std::size_t i : idx) {
        if (i >= d) throw ConfigError("mask: feature index out of range");
        m.bits[i] = 1;
    }
    return m;
}

/// Keeps only the masked columns. Training on an empty mask is meaningless,
/// so it is rejected here.
inline Dataset apply_mask(const Dataset& d, const FeatureMask& m) {
    if (m.size() != d.n_cols()) throw DataError("mask: length does not match feature count");
    if (m.count() == 0) throw DataError("mask: no features selected");
    return d.select_columns(m.indices());
}

/// Per-feature chi-squared statistic of the feature-bin x class contingency
/// table: sum over cells with positive expectation of (obs-exp)^2/exp.
/// Features must already hold small nonnegative integer bin indices
/// (quantile_bin output qualifies).
inline FeatureScores chi2_scores(const Dataset& d) {
    if (d.n_rows() == 0) throw DataError("chi2: empty dataset");
    const std::size_t n = d.n_rows();
    const std::size_t k = d.n_classes();
    FeatureScores out;
    out.method = "chi2";
    out.higher_is_better = true;
    out.scores.resize(d.n_cols());

    std::vector<double> obs, row_sum, col_sum;
    for (std::size_t f = 0; f < d.n_cols(); ++f) {
        std::size_t max_bin = 0;
        for (std::size_t r = 0; r < n; ++r) {
            const double v = d.at(r, f);
            if (!(v >= 0.0) || v != std::floor(v) || v > 65535.0)
                throw DataError("chi2: feature " + std::to_string(f) +
                                " is not a small nonnegative integer bin index");
            max_bin = std::max(max_bin, static_cast<std::size_t>(v));
        }
        const std::size_t n_bins = max_bin + 1;
        obs.assign(n_bins * k, 0.0);
        row_sum.assign(n_bins, 0.0);
        col_sum.assign(k, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const auto b = static_cast<std::size_t>(d.at(r, f));
            const auto c = static_cast<std::size_t>(d.labels[r]);
            obs[b * k + c] += 1.0;
            row_sum[b] += 1.0;
            col_sum[c] += 1.0;
        }
        double score = 0.0;
        for (std::size_t b = 0; b < n_bins; ++b) {
            for (std::size_t c = 0; c < k; ++c) {
                const double expected = row_sum[b] * col_sum[c] / static_cast<double>(n);
                if (expected <= 0.0) continue;
                const double diff = obs[b * k + c] - expected;
                score += diff * diff / expected;
            }
        }
        out.scores[f] = score;
    }
    return out;
}

/// chi2_scores(quantile_bin(d, n_bins)) in one pass: bins each feature at
/// its own quantile cuts and accumulates the contingency table directly,
/// never materializing the binned matrix. Columns are staged in blocks so
/// the scans stay sequential on the row-major storage; the scores are
/// bitwise identical to the composed form.
inline FeatureScores chi2_binned_scores(const Dataset& d, std::size_t n_bins) {
    if (n_bins < 2) throw ConfigError("quantile_bin: n_bins must be >= 2");
    if (d.n_rows() == 0) throw DataError("chi2: empty dataset");
    const std::size_t n = d.n_rows();
    const std::size_t k = d.n_classes();
    FeatureScores out;
    out.method = "chi2";
    out.higher_is_better = true;
    out.scores.resize(d.n_cols());
    if (d.n_cols() == 0) return out;

    constexpr std::size_t kBlock = 128;
    std::vector<double> stage(std::min(kBlock, d.n_cols()) * n);
    std::vector<double> sorted(n);
    std::vector<double> cuts;
    cuts.reserve(n_bins - 1);
    std::vector<std::size_t> bin(n);
    std::vector<double> obs, row_sum, col_sum;
    for (std::size_t c0 = 0; c0 < d.n_cols(); c0 += kBlock) {
        const std::size_t width = std::min(kBlock, d.n_cols() - c0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < width; ++j) stage[j * n + r] = d.at(r, c0 + j);
        for (std::size_t j = 0; j < width; ++j) {
            const double* col = stage.data() + j * n;
            std::copy_n(col, n, sorted.data());
            std::sort(sorted.begin(), sorted.end());
            cuts.clear();
            for (std::size_t b = 1; b < n_bins; ++b) {
                const std::size_t pos = (b * n + n_bins - 1) / n_bins;  // ceil(b*n/n_bins)
                if (pos == 0 || pos > n) continue;
                cuts.push_back(sorted[pos - 1]);
            }
            std::size_t max_bin = 0;
            for (std::size_t r = 0; r < n; ++r) {
                // First cut not below the value; a linear scan beats binary
                // search at these cut counts.
                const double v = col[r];
                std::size_t b = 0;
                while (b < cuts.size() && cuts[b] < v) ++b;
                bin[r] = b;
                max_bin = std::max(max_bin, b);
            }
            const std::size_t rows = max_bin + 1;
            obs.assign(rows * k, 0.0);
            row_sum.assign(rows, 0.0);
            col_sum.assign(k, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                const auto y = static_cast<std::size_t>(d.labels[r]);
                obs[bin[r] * k + y] += 1.0;
                row_sum[bin[r]] += 1.0;
                col_sum[y] += 1.0;
            }
            double score = 0.0;
            for (std::size_t b = 0; b < rows; ++b) {
                for (std::size_t c = 0; c < k; ++c) {
                    const double expected = row_sum[b] * col_sum[c] / static_cast<double>(n);
                    if (expected <= 0.0) continue;
                    const double diff = obs[b * k + c] - expected;
                    score += diff * diff / expected;
                }
            }
            out.scores[c0 + j] = score;
        }
    }
    return out;
}

/// Mask of the k best-scoring features; score ties go to the lower feature
/// index. Low scores win when the scores are not higher-is-better.
inline FeatureMask select_top_k(const FeatureScores& s, std::size_t k) {
    const std::size_t d = s.scores.size();
    if (k < 1 || k > d)
        throw ConfigError("select_top_k: k must be in [1, " + std::to_string(d) + "]");
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return s.higher_is_better ? s.scores[a] > s.scores[b] : s.scores[a] < s.scores[b];
    });
    order.resize(k);
    return mask_from_indices(d, order);
}

namespace detail {

/// Clips negative weights to zero and rescales to sum d. Returns false when
/// everything clipped to zero (caller keeps the previous iterate).
inline bool project_weights(std::vector<double>& w) {
    double total = 0.0;
    for (double& v : w) {
        if (v < 0.0) v = 0.0;
        total += v;
    }
    if (total <= 0.0) return false;
    const double scale = static_cast<double>(w.size()) / total;
    for (double& v : w) v *= scale;
    return true;
}

}  // namespace detail

/// Contrastive kernel relevance: maximizes J(w) = mean weighted-kernel
/// similarity between same-class pairs minus the mean between
/// different-class pairs, where the weighted kernel is
/// exp(-sum_f w_f (x_f - y_f)^2 / (2 sigma^2)). Projected gradient ascent
/// with a backtracking step (halved until J improves), weights kept
/// nonnegative with sum d after every iteration, so J never decreases.
/// Stops when the max absolute weight change drops below tol or after
/// max_iter iterations. Optional traces record the objective and the weight
/// vector per accepted iterate (initial point included).
inline FeatureScores kernel_relevance_weights(const Dataset& d, const KernelParams& kernel,
                                              double tol, std::size_t max_iter,
                                              std::vector<double>* objective_trace = nullptr,
                                              std::vector<std::vector<double>>* weight_trace =
                                                  nullptr) {
    if (kernel.kind != KernelKind::gaussian)
        throw ConfigError("kernel_relevance: gaussian kernel required");
    if (tol <= 0.0) throw ConfigError("kernel_relevance: tol must be positive");
    if (d.n_rows() < 2) throw DataError("kernel_relevance: need at least 2 samples");
    const auto counts = d.class_counts();
    std::size_t present = 0, same_pairs = 0;
    for (std::size_t c : counts) {
        if (c > 0) ++present;
        same_pairs += c * (c - 1) / 2;
    }
    if (present < 2) throw DataError("kernel_relevance: need at least 2 classes");
    if (same_pairs == 0) throw DataError("kernel_relevance: no same-class pair exists");

    const KernelParams resolved = resolve_kernel(kernel, d);
    const double inv_two_sigma_sq = 1.0 / (2.0 * resolved.sigma * resolved.sigma);
    const std::size_t n = d.n_rows();
    const std::size_t nf = d.n_cols();
    const std::size_t n_same = same_pairs;
    const std::size_t n_diff = n * (n - 1) / 2 - same_pairs;

    // J(w); fills grad with dJ/dw when requested.
    std::vector<double> sq(nf);
    auto evaluate = [&](const std::vector<double>& w, std::vector<double>* grad) {
        double j_same = 0.0, j_diff = 0.0;
        if (grad) std::fill(grad->begin(), grad->end(), 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            const auto xa = d.row(a);
            for (std::size_t b = a + 1; b < n; ++b) {
                const auto xb = d.row(b);
                double dist = 0.0;
                for (std::size_t f = 0; f < nf; ++f) {
                    const double diff = xa[f] - xb[f];
                    sq[f] = diff * diff;
                    dist += w[f] * sq[f];
                }
                const double kv = std::exp(-dist * inv_two_sigma_sq);
                const bool same = d.labels[a] == d.labels[b];
                const double sign = same ? 1.0 / static_cast<double>(n_same)
                                         : -1.0 / static_cast<double>(n_diff);
                (same ? j_same : j_diff) += kv;
                if (grad) {
                    const double coeff = sign * kv * -inv_two_sigma_sq;
                    for (std::size_t f = 0; f < nf; ++f) (*grad)[f] += coeff * sq[f];
                }
            }
        }
        return j_same / static_cast<double>(n_same) - j_diff / static_cast<double>(n_diff);
    };

    std::vector<double> w(nf, 1.0);
    std::vector<double> grad(nf);
    double j = evaluate(w, &grad);
    if (objective_trace) objective_trace->push_back(j);
    if (weight_trace) weight_trace->push_back(w);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double g_max = 0.0;
        for (double g : grad) g_max = std::max(g_max, std::abs(g));
        if (g_max == 0.0) break;
        double t = 0.5 / g_max;
        std::vector<double> trial(nf);
        bool improved = false;
        for (int halvings = 0; halvings < 30; ++halvings) {
            for (std::size_t f = 0; f < nf; ++f) trial[f] = w[f] + t * grad[f];
            if (detail::project_weights(trial)) {
                const double j_trial = evaluate(trial, nullptr);
                if (j_trial > j) {
                    double delta = 0.0;
                    for (std::size_t f = 0; f < nf; ++f)
                        delta = std::max(delta, std::abs(trial[f] - w[f]));
                    w.swap(trial);
                    j = j_trial;
                    improved = true;
                    if (objective_trace) objective_trace->push_back(j);
                    if (weight_trace) weight_trace->push_back(w);
                    if (delta < tol) iter = max_iter;  // converged
                    break;
                }
            }
            t *= 0.5;
        }
        if (!improved) break;
        if (iter < max_iter) j = evaluate(w, &grad);
    }

    FeatureScores out;
    out.method = "kernel_relevance";
    out.higher_is_better = true;
    out.scores = std::move(w);
    return out;
}

/// Recursive elimination result. rank is a permutation of 1..d with 1 on the
/// last survivor; elimination_order lists features in removal order.
struct RfeRanking {
    std::vector<std::size_t> rank;
    std::vector<std::size_t> elimination_order;
};

/// Recursive feature elimination with a linear SVM: repeatedly train on the
/// survivors, score each surviving feature R_j = w_j^2 summed across the
/// one-vs-rest machines, and drop the `step` lowest-R features (ties drop
/// the higher feature index first). step_fraction > 0 replaces the fixed
/// step with ceil(step_fraction * survivors) per round.
inline RfeRanking svm_rfe(const Dataset& d, const SvmParams& params, std::size_t step = 1,
                          double step_fraction = 0.0) {
    if (params.kernel.kind != KernelKind::linear)
        throw ConfigError("svm_rfe: linear kernel required");
    if (step < 1) throw ConfigError("svm_rfe: step must be >= 1");
    if (step_fraction < 0.0 || step_fraction >= 1.0)
        throw ConfigError("svm_rfe: step_fraction must be in [0,1)");
    if (d.n_rows() == 0) throw DataError("svm_rfe: empty dataset");
    const std::size_t nf = d.n_cols();
    if (nf == 0) throw DataError("svm_rfe: dataset has no features");

    RfeRanking out;
    out.rank.assign(nf, 0);
    out.elimination_order.reserve(nf);
    std::vector<std::size_t> survivors(nf);
    std::iota(survivors.begin(), survivors.end(), 0);

    while (!survivors.empty()) {
        const Dataset sub = d.select_columns(survivors);
        const SvmModel model = svm_train(sub, params);
        std::vector<double> relevance(survivors.size(), 0.0);
        for (const BinarySvm& machine : model.machines) {
            const std::vector<double> w = svm_linear_weights(machine);
            for (std::size_t f = 0; f < w.size(); ++f) relevance[f] += w[f] * w[f];
        }
        std::size_t m = step_fraction > 0.0
                            ? static_cast<std::size_t>(std::ceil(
                                  step_fraction * static_cast<double>(survivors.size())))
                            : step;
        m = std::max<std::size_t>(1, std::min(m, survivors.size()));

        std::vector<std::size_t> pos(survivors.size());
        std::iota(pos.begin(), pos.end(), 0);
        std::sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
            if (relevance[a] != relevance[b]) return relevance[a] < relevance[b];
            return survivors[a] > survivors[b];
        });
        pos.resize(m);
        std::vector<std::size_t> removed;
        removed.reserve(m);
        for (std::size_t p : pos) {
            out.elimination_order.push_back(survivors[p]);
            removed.push_back(survivors[p]);
        }
        std::sort(removed.begin(), removed.end());
        std::vector<std::size_t> next;
        next.reserve(survivors.size() - m);
        std::set_difference(survivors.begin(), survivors.end(), removed.begin(), removed.end(),
                            std::back_inserter(next));
        survivors.swap(next);
    }
    for (std::size_t i = 0; i < nf; ++i) out.rank[out.elimination_order[i]] = nf - i;
    return out;
}

/// CSV dump: feature_name,score. Falls back to f<i> names when the name
/// vector is empty.
inline void write_scores_csv(std::ostream& os, const std::vector<std::string>& feature_names,
                             const FeatureScores& s) {
    os << "feature_name,score\n";
    char buf[32];
    for (std::size_t f = 0; f < s.scores.size(); ++f) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.scores[f]);
        os << (f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f)) << ','
           << buf << '\n';
    }
}

/// CSV dump: feature_name,rank (1 = most important).
inline void write_ranking_csv(std::ostream& os, const std::vector<std::string>& feature_names,
                              const RfeRanking& r) {
    os << "feature_name,rank\n";
    for (std::size_t f = 0; f < r.rank.size(); ++f)
        os << (f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f)) << ','
           << r.rank[f] << '\n';
}

}  // namespace featbench
