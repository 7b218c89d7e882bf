#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "featbench/errors.hpp"

namespace featbench {

enum class ReportFormat { markdown, csv };

/// One grid cell. Metrics are fractions in [0,1]; times are wall-clock
/// milliseconds around the select/train calls only. With repeats > 1 every
/// numeric field is the mean across repeats (so n_features may be
/// fractional).
struct BenchRow {
    std::string selector;
    std::string classifier;
    double n_features = 0.0;
    double accuracy = 0.0;
    std::vector<double> precision;  // per class
    std::vector<double> recall;     // per class
    double select_ms = 0.0;
    double train_ms = 0.0;
};

struct BenchReport {
    std::vector<std::string> class_names;
    std::vector<BenchRow> rows;
    /// When false the two time columns are omitted from emitted text.
    bool include_timing = true;
};

namespace detail {

inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline std::string fmt_compact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

/// Renders the fixed column order: method (selector-classifier), accuracy
/// as a 2-decimal percentage, per-class precision then per-class recall at
/// 4 decimals, n_features, and (unless timing is off) select_ms/train_ms.
inline std::string emit_report(const BenchReport& r, ReportFormat format) {
    if (r.rows.empty()) throw ConfigError("report: empty report");
    for (const std::string& name : r.class_names)
        if (name.empty()) throw ConfigError("report: empty class name");

    std::vector<std::string> header{"method", "accuracy"};
    for (const std::string& name : r.class_names) header.push_back("precision_" + name);
    for (const std::string& name : r.class_names) header.push_back("recall_" + name);
    header.push_back("n_features");
    if (r.include_timing) {
        header.push_back("select_ms");
        header.push_back("train_ms");
    }

    std::vector<std::vector<std::string>> cells;
    cells.reserve(r.rows.size());
    for (const BenchRow& row : r.rows) {
        std::vector<std::string> line;
        line.push_back(row.selector + "-" + row.classifier);
        line.push_back(detail::fmt_fixed(row.accuracy * 100.0, 2));
        for (double p : row.precision) line.push_back(detail::fmt_fixed(p, 4));
        for (double v : row.recall) line.push_back(detail::fmt_fixed(v, 4));
        line.push_back(detail::fmt_compact(row.n_features));
        if (r.include_timing) {
            line.push_back(detail::fmt_fixed(row.select_ms, 2));
            line.push_back(detail::fmt_fixed(row.train_ms, 2));
        }
        if (line.size() != header.size())
            throw DataError("report: row '" + row.selector + "-" + row.classifier +
                            "' has a per-class metric count that does not match class_names");
        cells.push_back(std::move(line));
    }

    std::string out;
    if (format == ReportFormat::csv) {
        auto append_line = [&](const std::vector<std::string>& line) {
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (i > 0) out += ',';
                out += line[i];
            }
            out += '\n';
        };
        append_line(header);
        for (const auto& line : cells) append_line(line);
        return out;
    }
    auto append_line = [&](const std::vector<std::string>& line) {
        out += '|';
        for (const std::string& cell : line) {
            out += ' ';
            out += cell;
            out += " |";
        }
        out += '\n';
    };
    append_line(header);
    out += '|';
    for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
    out += '\n';
    for (const auto& line : cells) append_line(line);
    return out;
}

}  // namespace featbench
