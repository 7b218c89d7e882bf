#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/rng.hpp"
#include "featbench/tree.hpp"

namespace featbench {

struct ForestParams {
    std::size_t n_trees = 100;
    /// Candidate features per split; 0 means ceil(sqrt(n_features)).
    /// Values >= n_features disable per-node feature sampling.
    std::size_t features_per_split = 0;
    bool bootstrap = true;
    TreeParams tree{};
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    /// Per tree, the ascending set of features its internal nodes split on.
    std::vector<std::vector<std::size_t>> tree_features;
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
};

/// Bagged CART ensemble. Tree t draws from its own stream seeded with
/// mix_seed(seed, t): first the n bootstrap indices (when enabled), then the
/// per-node feature samples in build order, so results do not depend on
/// training order.
inline ForestModel forest_train(const Dataset& train, const ForestParams& params) {
    if (params.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    detail::validate_tree_params(params.tree);
    if (train.n_rows() == 0) throw DataError("forest: empty training set");
    if (train.n_classes() == 0) throw DataError("forest: dataset has no label names");
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_cols();
    const std::size_t m =
        params.features_per_split == 0
            ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
            : params.features_per_split;

    ForestModel model;
    model.n_classes = train.n_classes();
    model.n_features = d;
    model.trees.reserve(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        Rng rng(mix_seed(params.seed, t));
        std::vector<std::size_t> ids(n);
        if (params.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) ids[i] = rng.next_index(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) ids[i] = i;
        }
        detail::TreeBuilder builder(train, params.tree, train.n_classes(), m,
                                    m < d ? &rng : nullptr);
        builder.build(ids, 0);
        TreeModel tree;
        tree.nodes = builder.take();
        tree.n_features = d;
        tree.n_classes = train.n_classes();
        std::vector<std::size_t> used;
        for (const TreeNode& node : tree.nodes)
            if (node.left >= 0) used.push_back(node.feature);
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        model.tree_features.push_back(std::move(used));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

/// Majority vote over the trees, ties to the lowest class index.
inline int forest_predict_row(const ForestModel& model, std::span<const double> x) {
    std::vector<std::size_t> votes(model.n_classes, 0);
    for (const TreeModel& tree : model.trees)
        votes[static_cast<std::size_t>(tree_predict_row(tree, x))]++;
    int best = 0;
    for (std::size_t c = 1; c < model.n_classes; ++c)
        if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

inline std::vector<int> forest_predict(const ForestModel& model, const Dataset& data) {
    std::vector<int> out(data.n_rows());
    for (std::size_t i = 0; i < data.n_rows(); ++i)
        out[i] = forest_predict_row(model, data.row(i));
    return out;
}

}  // namespace featbench
