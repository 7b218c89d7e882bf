#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/rng.hpp"

namespace featbench {

struct TreeParams {
    /// Maximum node depth; -1 means unlimited, 0 makes the root a leaf.
    int max_depth = -1;
    /// Nodes with fewer samples than this become leaves.
    std::size_t min_split = 2;
};

/// Node of a binary CART tree. left < 0 marks a leaf; internal nodes route
/// x[feature] <= threshold to `left`, the rest to `right`. `label` holds the
/// node's majority class so every node can act as a leaf.
struct TreeNode {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::size_t feature = 0;
    double threshold = 0.0;
    int label = 0;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
};

namespace detail {

/// Grows Gini-impurity CART nodes over index subsets of one dataset.
/// When `rng` is set, each split search draws `features_per_split` candidate
/// features without replacement; otherwise every feature is a candidate.
/// Tie rule everywhere: first strictly better candidate wins, so equal-score
/// splits resolve to the lowest feature index, then the lowest threshold,
/// and majority votes resolve to the lowest class index.
class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, const TreeParams& params, std::size_t n_classes,
                std::size_t features_per_split, Rng* rng)
        : data_(data),
          params_(params),
          k_(n_classes),
          m_(features_per_split),
          rng_(rng) {}

    std::int32_t build(std::vector<std::size_t>& ids, int depth) {
        const std::size_t n = ids.size();
        std::vector<double> counts(k_, 0.0);
        for (std::size_t i : ids) counts[static_cast<std::size_t>(data_.labels[i])] += 1.0;
        int majority = 0;
        for (std::size_t c = 1; c < k_; ++c)
            if (counts[c] > counts[static_cast<std::size_t>(majority)])
                majority = static_cast<int>(c);
        const bool pure = counts[static_cast<std::size_t>(majority)] == static_cast<double>(n);
        const bool depth_capped = params_.max_depth >= 0 && depth >= params_.max_depth;
        if (pure || depth_capped || n < params_.min_split) return make_leaf(majority);

        const auto split = best_split(ids, counts);
        if (!split.found) return make_leaf(majority);

        std::vector<std::size_t> left_ids, right_ids;
        left_ids.reserve(n);
        right_ids.reserve(n);
        for (std::size_t i : ids)
            (data_.at(i, split.feature) <= split.threshold ? left_ids : right_ids).push_back(i);

        nodes_.push_back(TreeNode{-1, -1, split.feature, split.threshold, majority});
        const auto idx = static_cast<std::int32_t>(nodes_.size() - 1);
        const std::int32_t left = build(left_ids, depth + 1);
        nodes_[static_cast<std::size_t>(idx)].left = left;
        const std::int32_t right = build(right_ids, depth + 1);
        nodes_[static_cast<std::size_t>(idx)].right = right;
        return idx;
    }

    std::vector<TreeNode> take() { return std::move(nodes_); }

private:
    struct SplitChoice {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double decrease = 0.0;
    };

    std::int32_t make_leaf(int label) {
        nodes_.push_back(TreeNode{-1, -1, 0, 0.0, label});
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    /// Candidate thresholds are midpoints between distinct consecutive sorted
    /// values. With ss = sum of squared class counts, the Gini decrease of a
    /// split is (ssL/nL + ssR/nR - ssP/n) / n, kept incrementally as samples
    /// move from the right partition to the left.
    SplitChoice best_split(const std::vector<std::size_t>& ids, const std::vector<double>& counts) {
        const std::size_t n = ids.size();
        const std::size_t d = data_.n_cols();
        double ss_parent = 0.0;
        for (double c : counts) ss_parent += c * c;
        const double parent_term = ss_parent / static_cast<double>(n);

        std::vector<std::size_t> features;
        if (rng_ != nullptr && m_ < d) {
            features = rng_->sample_indices(d, m_);
        } else {
            features.resize(d);
            for (std::size_t f = 0; f < d; ++f) features[f] = f;
        }

        SplitChoice best;
        std::vector<std::pair<double, int>> vals(n);
        std::vector<double> left_counts(k_), right_counts(k_);
        for (std::size_t f : features) {
            for (std::size_t i = 0; i < n; ++i)
                vals[i] = {data_.at(ids[i], f), data_.labels[ids[i]]};
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            std::fill(left_counts.begin(), left_counts.end(), 0.0);
            right_counts = counts;
            double ss_left = 0.0;
            double ss_right = ss_parent;
            for (std::size_t i = 1; i < n; ++i) {
                const auto c = static_cast<std::size_t>(vals[i - 1].second);
                ss_left += 2.0 * left_counts[c] + 1.0;
                ss_right -= 2.0 * right_counts[c] - 1.0;
                left_counts[c] += 1.0;
                right_counts[c] -= 1.0;
                if (vals[i].first == vals[i - 1].first) continue;
                const double decrease = (ss_left / static_cast<double>(i) +
                                         ss_right / static_cast<double>(n - i) - parent_term) /
                                        static_cast<double>(n);
                if (decrease > best.decrease) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (vals[i - 1].first + vals[i].first);
                    best.decrease = decrease;
                }
            }
        }
        return best;
    }

    const Dataset& data_;
    const TreeParams& params_;
    std::size_t k_;
    std::size_t m_;
    Rng* rng_;
    std::vector<TreeNode> nodes_;
};

inline void validate_tree_params(const TreeParams& p) {
    if (p.max_depth < -1) throw ConfigError("tree: max_depth must be >= -1");
    if (p.min_split < 2) throw ConfigError("tree: min_split must be >= 2");
}

}  // namespace detail

inline TreeModel tree_train(const Dataset& train, const TreeParams& params) {
    detail::validate_tree_params(params);
    if (train.n_rows() == 0) throw DataError("tree: empty training set");
    if (train.n_classes() == 0) throw DataError("tree: dataset has no label names");
    detail::TreeBuilder builder(train, params, train.n_classes(), train.n_cols(), nullptr);
    std::vector<std::size_t> ids(train.n_rows());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    builder.build(ids, 0);
    TreeModel model;
    model.nodes = builder.take();
    model.n_features = train.n_cols();
    model.n_classes = train.n_classes();
    return model;
}

inline int tree_predict_row(const TreeModel& model, std::span<const double> x) {
    if (x.size() != model.n_features) throw DataError("tree: feature count mismatch");
    std::size_t at = 0;
    while (model.nodes[at].left >= 0) {
        const TreeNode& node = model.nodes[at];
        at = static_cast<std::size_t>(x[node.feature] <= node.threshold ? node.left : node.right);
    }
    return model.nodes[at].label;
}

inline std::vector<int> tree_predict(const TreeModel& model, const Dataset& data) {
    std::vector<int> out(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i) out[i] = tree_predict_row(model, data.row(i));
    return out;
}

}  // namespace featbench
