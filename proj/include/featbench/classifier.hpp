#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/forest.hpp"
#include "featbench/naive_bayes.hpp"
#include "featbench/neural_net.hpp"
#include "featbench/svm.hpp"
#include "featbench/tree.hpp"

namespace featbench {

/// Any one classifier configuration.
using ClassifierSpec = std::variant<SvmParams, TreeParams, ForestParams, NbParams, NnParams>;

/// Any one trained model.
using AnyModel = std::variant<SvmModel, TreeModel, ForestModel, NbModel, NnModel>;

inline std::string classifier_name(const ClassifierSpec& spec) {
    struct Visitor {
        std::string operator()(const SvmParams&) const { return "SVM"; }
        std::string operator()(const TreeParams&) const { return "decision tree"; }
        std::string operator()(const ForestParams&) const { return "random forest"; }
        std::string operator()(const NbParams&) const { return "naive Bayes"; }
        std::string operator()(const NnParams&) const { return "neural network"; }
    };
    return std::visit(Visitor{}, spec);
}

/// Trains the configured classifier. `seed` replaces the seed field of
/// seeded classifiers so callers control reproducibility centrally; tree and
/// naive Bayes ignore it (they are deterministic by construction).
inline AnyModel train_classifier(const Dataset& train, const ClassifierSpec& spec,
                                 std::uint64_t seed) {
    struct Visitor {
        const Dataset& train;
        std::uint64_t seed;

        AnyModel operator()(const SvmParams& p) const {
            SvmParams seeded = p;
            seeded.seed = seed;
            return svm_train(train, seeded);
        }
        AnyModel operator()(const TreeParams& p) const { return tree_train(train, p); }
        AnyModel operator()(const ForestParams& p) const {
            ForestParams seeded = p;
            seeded.seed = seed;
            return forest_train(train, seeded);
        }
        AnyModel operator()(const NbParams&) const { return nb_train(train); }
        AnyModel operator()(const NnParams& p) const {
            NnParams seeded = p;
            seeded.seed = seed;
            return nn_train(train, seeded);
        }
    };
    return std::visit(Visitor{train, seed}, spec);
}

inline std::vector<int> predict_any(const AnyModel& model, const Dataset& data) {
    struct Visitor {
        const Dataset& data;

        std::vector<int> operator()(const SvmModel& m) const { return svm_predict(m, data); }
        std::vector<int> operator()(const TreeModel& m) const { return tree_predict(m, data); }
        std::vector<int> operator()(const ForestModel& m) const { return forest_predict(m, data); }
        std::vector<int> operator()(const NbModel& m) const { return nb_predict(m, data); }
        std::vector<int> operator()(const NnModel& m) const { return nn_predict(m, data); }
    };
    return std::visit(Visitor{data}, model);
}

namespace detail {

inline std::string dump_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void dump_vector(std::ostream& os, const std::string& key, const std::vector<double>& v) {
    os << key;
    for (double x : v) os << ' ' << dump_double(x);
    os << '\n';
}

inline void dump_tree_nodes(std::ostream& os, const TreeModel& m) {
    os << "nodes " << m.nodes.size() << '\n';
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        const TreeNode& n = m.nodes[i];
        os << "node " << i << ' ' << n.left << ' ' << n.right << ' ' << n.feature << ' '
           << dump_double(n.threshold) << ' ' << n.label << '\n';
    }
}

}  // namespace detail

/// Writes a model as documented plain text: a model-name line, hyperparameter
/// lines, then flattened weights, one "key value..." line each.
inline void dump_model(const AnyModel& model, std::ostream& os) {
    struct Visitor {
        std::ostream& os;

        void operator()(const SvmModel& m) const {
            os << "model svm\n";
            os << "n_classes " << m.n_classes << '\n';
            os << "n_features " << m.n_features << '\n';
            os << "c " << detail::dump_double(m.params.c) << '\n';
            os << "kernel " << kernel_name(m.params.kernel) << '\n';
            if (m.params.kernel.kind == KernelKind::gaussian)
                os << "sigma " << detail::dump_double(m.params.kernel.sigma) << '\n';
            os << "machines " << m.machines.size() << '\n';
            for (std::size_t i = 0; i < m.machines.size(); ++i) {
                const BinarySvm& b = m.machines[i];
                os << "machine " << i << '\n';
                os << "bias " << detail::dump_double(b.bias) << '\n';
                os << "n_support " << b.n_support() << '\n';
                detail::dump_vector(os, "dual_coeffs", b.dual_coeffs);
                detail::dump_vector(os, "support_vectors", b.support_vectors);
            }
        }
        void operator()(const TreeModel& m) const {
            os << "model tree\n";
            os << "n_classes " << m.n_classes << '\n';
            os << "n_features " << m.n_features << '\n';
            detail::dump_tree_nodes(os, m);
        }
        void operator()(const ForestModel& m) const {
            os << "model forest\n";
            os << "n_classes " << m.n_classes << '\n';
            os << "n_features " << m.n_features << '\n';
            os << "n_trees " << m.trees.size() << '\n';
            for (std::size_t t = 0; t < m.trees.size(); ++t) {
                os << "tree " << t << '\n';
                detail::dump_tree_nodes(os, m.trees[t]);
            }
        }
        void operator()(const NbModel& m) const {
            os << "model naive_bayes\n";
            os << "n_classes " << m.n_classes << '\n';
            os << "n_features " << m.n_features << '\n';
            os << "variance_floor " << detail::dump_double(m.variance_floor) << '\n';
            detail::dump_vector(os, "log_priors", m.log_priors);
            detail::dump_vector(os, "means", m.means);
            detail::dump_vector(os, "variances", m.variances);
        }
        void operator()(const NnModel& m) const {
            os << "model neural_net\n";
            os << "n_inputs " << m.n_inputs << '\n';
            os << "n_hidden " << m.n_hidden << '\n';
            os << "n_outputs " << m.n_outputs << '\n';
            os << "activation " << m.activation << '\n';
            detail::dump_vector(os, "w1", m.w1);
            detail::dump_vector(os, "b1", m.b1);
            detail::dump_vector(os, "w2", m.w2);
            detail::dump_vector(os, "b2", m.b2);
        }
    };
    std::visit(Visitor{os}, model);
}

}  // namespace featbench
