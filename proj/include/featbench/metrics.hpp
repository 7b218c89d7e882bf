#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "featbench/errors.hpp"

namespace featbench {

/// Per-class tally of (true, predicted) label pairs. counts(i, j) is the
/// number of samples of true class i predicted as class j, so in the binary
/// case TP = counts(0,0), FN = counts(0,1), FP = counts(1,0), TN = counts(1,1).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t n_classes)
        : n_(n_classes), counts_(n_classes * n_classes, 0) {
        if (n_classes < 2) throw ConfigError("confusion: n_classes must be >= 2");
    }

    std::size_t n_classes() const { return n_; }
    std::uint64_t counts(std::size_t t, std::size_t p) const { return counts_[t * n_ + p]; }
    std::uint64_t& counts(std::size_t t, std::size_t p) { return counts_[t * n_ + p]; }

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto v : counts_) s += v;
        return s;
    }

    std::uint64_t row_sum(std::size_t t) const {
        std::uint64_t s = 0;
        for (std::size_t p = 0; p < n_; ++p) s += counts(t, p);
        return s;
    }

    std::uint64_t col_sum(std::size_t p) const {
        std::uint64_t s = 0;
        for (std::size_t t = 0; t < n_; ++t) s += counts(t, p);
        return s;
    }

private:
    std::size_t n_;
    std::vector<std::uint64_t> counts_;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    double macro_f1 = 0.0;
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 std::size_t n_classes) {
    if (y_true.size() != y_pred.size())
        throw DataError("confusion: y_true and y_pred lengths differ (" +
                        std::to_string(y_true.size()) + " vs " + std::to_string(y_pred.size()) +
                        ")");
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if (t < 0 || static_cast<std::size_t>(t) >= n_classes || p < 0 ||
            static_cast<std::size_t>(p) >= n_classes)
            throw DataError("confusion: label out of range at index " + std::to_string(i));
        cm.counts(static_cast<std::size_t>(t), static_cast<std::size_t>(p)) += 1;
    }
    return cm;
}

/// Accuracy plus per-class precision/recall/F1. Undefined ratios (0/0)
/// evaluate to 0.
inline MetricsReport report(const ConfusionMatrix& cm) {
    const std::uint64_t total = cm.total();
    if (total == 0) throw DataError("report: confusion matrix is empty");
    MetricsReport r;
    std::uint64_t diag = 0;
    for (std::size_t c = 0; c < cm.n_classes(); ++c) diag += cm.counts(c, c);
    r.accuracy = static_cast<double>(diag) / static_cast<double>(total);
    r.per_class.resize(cm.n_classes());
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < cm.n_classes(); ++c) {
        const std::uint64_t tp = cm.counts(c, c);
        const std::uint64_t col = cm.col_sum(c);
        const std::uint64_t row = cm.row_sum(c);
        ClassMetrics& m = r.per_class[c];
        m.precision = col == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
        m.recall = row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
        m.f1 = (m.precision + m.recall) == 0.0
                   ? 0.0
                   : 2.0 * m.precision * m.recall / (m.precision + m.recall);
        f1_sum += m.f1;
    }
    r.macro_f1 = f1_sum / static_cast<double>(cm.n_classes());
    return r;
}

}  // namespace featbench
