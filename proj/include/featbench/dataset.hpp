#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "featbench/errors.hpp"
#include "featbench/rng.hpp"

namespace featbench {

/// In-memory tabular dataset: a row-major real-valued feature matrix plus
/// integer class labels and the name vocabularies for both axes.
/// Missing values are stored as NaN until clean() removes them.
class Dataset {
public:
    std::vector<std::string> feature_names;
    std::vector<int> labels;
    std::vector<std::string> label_names;

    Dataset() = default;
    Dataset(std::size_t n_rows, std::size_t n_cols)
        : values_(n_rows * n_cols, 0.0), n_rows_(n_rows), n_cols_(n_cols) {}

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    std::size_t n_classes() const { return label_names.size(); }

    double at(std::size_t r, std::size_t c) const { return values_[r * n_cols_ + c]; }
    double& at(std::size_t r, std::size_t c) { return values_[r * n_cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values_.data() + r * n_cols_, n_cols_);
    }

    const std::vector<double>& values() const { return values_; }

    std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> counts(label_names.size(), 0);
        for (int y : labels) counts[static_cast<std::size_t>(y)]++;
        return counts;
    }

    /// Checks the structural invariants and throws DataError on violation.
    void validate() const {
        if (labels.size() != n_rows_)
            throw DataError("dataset: label count " + std::to_string(labels.size()) +
                            " does not match row count " + std::to_string(n_rows_));
        if (!feature_names.empty() && feature_names.size() != n_cols_)
            throw DataError("dataset: feature_names length does not match column count");
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= label_names.size())
                throw DataError("dataset: label index out of range at row " + std::to_string(i));
        }
    }

    Dataset select_rows(const std::vector<std::size_t>& idx) const {
        Dataset out(idx.size(), n_cols_);
        out.feature_names = feature_names;
        out.label_names = label_names;
        out.labels.resize(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            std::copy_n(values_.data() + idx[r] * n_cols_, n_cols_,
                        out.values_.data() + r * n_cols_);
            out.labels[r] = labels[idx[r]];
        }
        return out;
    }

    Dataset select_columns(const std::vector<std::size_t>& cols) const {
        Dataset out(n_rows_, cols.size());
        out.labels = labels;
        out.label_names = label_names;
        if (!feature_names.empty()) {
            out.feature_names.reserve(cols.size());
            for (std::size_t c : cols) out.feature_names.push_back(feature_names[c]);
        }
        for (std::size_t r = 0; r < n_rows_; ++r)
            for (std::size_t j = 0; j < cols.size(); ++j)
                out.at(r, j) = at(r, cols[j]);
        return out;
    }

private:
    std::vector<double> values_;
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
};

struct SplitConfig {
    double train_fraction = 0.65;
    std::uint64_t seed = 0;
    bool stratified = true;
};

/// Drops rows containing missing values (NaN), then drops exact duplicate
/// rows (identical feature bytes and label), keeping the first occurrence.
/// Surviving row order is preserved; idempotent.
inline Dataset clean(const Dataset& d) {
    std::vector<std::size_t> keep;
    keep.reserve(d.n_rows());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        const auto row = d.row(r);
        bool missing = false;
        for (double v : row)
            if (std::isnan(v)) { missing = true; break; }
        if (missing) continue;
        std::string key(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
        key.append(reinterpret_cast<const char*>(&d.labels[r]), sizeof(int));
        if (seen.insert(std::move(key)).second) keep.push_back(r);
    }
    return d.select_rows(keep);
}

namespace detail {

/// Largest-remainder apportionment of `total` units over quotas, ties broken
/// toward the lower index.
inline std::vector<std::size_t> largest_remainder(const std::vector<double>& quotas,
                                                  std::size_t total) {
    const std::size_t k = quotas.size();
    std::vector<std::size_t> base(k);
    std::vector<double> rem(k);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        base[i] = static_cast<std::size_t>(std::floor(quotas[i]));
        rem[i] = quotas[i] - static_cast<double>(base[i]);
        assigned += base[i];
    }
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; assigned < total && i < k; ++i) {
        base[order[i]] += 1;
        ++assigned;
    }
    return base;
}

}  // namespace detail

/// Partitions [0, n) into train/test index sets. Stratified mode apportions
/// the train quota per class by largest remainder (ties to the lower class
/// index) and shuffles within each class with the given seed.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_indices(const std::vector<int>& labels, std::size_t n_classes, const SplitConfig& cfg) {
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
        throw ConfigError("split: train_fraction must be in (0,1)");
    const std::size_t n = labels.size();
    const std::size_t total_train =
        static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(n) + 0.5));
    std::vector<std::size_t> train, test;
    Rng rng(cfg.seed);
    if (!cfg.stratified) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(idx);
        train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(total_train));
        test.assign(idx.begin() + static_cast<std::ptrdiff_t>(total_train), idx.end());
        return {std::move(train), std::move(test)};
    }
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    std::vector<double> quotas(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (by_class[c].size() < 2)
            throw DataError("split: class " + std::to_string(c) +
                            " has fewer than 2 samples; stratification impossible");
        quotas[c] = cfg.train_fraction * static_cast<double>(by_class[c].size());
    }
    const auto per_class = detail::largest_remainder(quotas, total_train);
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& members = by_class[c];
        Rng class_rng(mix_seed(cfg.seed, c));
        class_rng.shuffle(members);
        const std::size_t take = std::min(per_class[c], members.size());
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < take ? train : test).push_back(members[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d, const SplitConfig& cfg) {
    auto [train_idx, test_idx] = split_indices(d.labels, d.n_classes(), cfg);
    return {d.select_rows(train_idx), d.select_rows(test_idx)};
}

/// Replaces each feature column with equal-frequency bin indices in
/// [0, n_bins-1]. Cut points are the last sorted value of each nominal bin;
/// a value's bin is the number of cut points strictly below it, so constant
/// columns land entirely in bin 0.
inline Dataset quantile_bin(const Dataset& d, std::size_t n_bins) {
    if (n_bins < 2) throw ConfigError("quantile_bin: n_bins must be >= 2");
    const std::size_t n = d.n_rows();
    Dataset out(n, d.n_cols());
    out.feature_names = d.feature_names;
    out.labels = d.labels;
    out.label_names = d.label_names;
    if (n == 0) return out;
    std::vector<double> col(n), sorted(n), cuts;
    cuts.reserve(n_bins - 1);
    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = d.at(r, c);
        sorted = col;
        std::sort(sorted.begin(), sorted.end());
        cuts.clear();
        for (std::size_t b = 1; b < n_bins; ++b) {
            const std::size_t pos = (b * n + n_bins - 1) / n_bins;  // ceil(b*n/n_bins)
            if (pos == 0 || pos > n) continue;
            cuts.push_back(sorted[pos - 1]);
        }
        for (std::size_t r = 0; r < n; ++r) {
            const auto it = std::lower_bound(cuts.begin(), cuts.end(), col[r]);
            out.at(r, c) = static_cast<double>(it - cuts.begin());
        }
    }
    return out;
}

struct SynthSpec {
    std::size_t n_samples = 0;
    std::size_t n_features = 0;
    std::size_t n_informative = 0;
    std::size_t n_classes = 2;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;
    /// Optional relative class sizes; empty means balanced.
    std::vector<double> class_weights;
};

struct SynthResult {
    Dataset data;
    /// Ascending indices of the class-informative feature columns.
    std::vector<std::size_t> informative;
};

/// Distance between adjacent class means along each informative feature,
/// in units of the informative features' unit standard deviation.
inline constexpr double kSynthSeparation = 2.0;

/// Generates a labeled dataset where `n_informative` seeded feature columns
/// carry a class signal (class c drawn around mean c * kSynthSeparation) and
/// the rest are pure noise with standard deviation `noise_scale`.
inline SynthResult synth_generate(const SynthSpec& spec) {
    if (spec.n_classes < 2) throw ConfigError("synth: n_classes must be >= 2");
    if (spec.n_informative > spec.n_features)
        throw ConfigError("synth: n_informative must be <= n_features");
    if (spec.noise_scale < 0.0) throw ConfigError("synth: noise_scale must be >= 0");
    if (!spec.class_weights.empty()) {
        if (spec.class_weights.size() != spec.n_classes)
            throw ConfigError("synth: class_weights length must equal n_classes");
        for (double w : spec.class_weights)
            if (w <= 0.0) throw ConfigError("synth: class_weights must be positive");
    }

    const std::size_t n = spec.n_samples;
    const std::size_t k = spec.n_classes;
    std::vector<double> weights = spec.class_weights;
    if (weights.empty()) weights.assign(k, 1.0);
    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;
    std::vector<double> quotas(k);
    for (std::size_t c = 0; c < k; ++c)
        quotas[c] = static_cast<double>(n) * weights[c] / weight_sum;
    const auto sizes = detail::largest_remainder(quotas, n);

    SynthResult out;
    out.data = Dataset(n, spec.n_features);
    Rng rng(spec.seed);
    out.informative = rng.sample_indices(spec.n_features, spec.n_informative);
    std::vector<bool> is_informative(spec.n_features, false);
    for (std::size_t f : out.informative) is_informative[f] = true;

    std::vector<int> block_labels;
    block_labels.reserve(n);
    for (std::size_t c = 0; c < k; ++c)
        block_labels.insert(block_labels.end(), sizes[c], static_cast<int>(c));
    rng.shuffle(block_labels);

    out.data.labels = std::move(block_labels);
    for (std::size_t r = 0; r < n; ++r) {
        const double shift = kSynthSeparation * static_cast<double>(out.data.labels[r]);
        for (std::size_t f = 0; f < spec.n_features; ++f) {
            out.data.at(r, f) = is_informative[f] ? shift + rng.next_gaussian()
                                                  : spec.noise_scale * rng.next_gaussian();
        }
    }
    out.data.feature_names.reserve(spec.n_features);
    for (std::size_t f = 0; f < spec.n_features; ++f)
        out.data.feature_names.push_back("f" + std::to_string(f));
    out.data.label_names.reserve(k);
    for (std::size_t c = 0; c < k; ++c) out.data.label_names.push_back("c" + std::to_string(c));
    out.data.validate();
    return out;
}

}  // namespace featbench
