#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"

namespace featbench {

/// Raw comma-separated table: header row plus string cells. No quoting or
/// escaping; cells must not contain commas or newlines.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open '" + path + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: '" + path + "' is empty (no header row)");
    t.header = detail::split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != t.header.size())
            throw DataError("csv: row " + std::to_string(t.rows.size() + 1) + " of '" + path +
                            "' has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

/// Loads a CSV file into a Dataset. `label_column` names the class column;
/// all other columns must parse as real numbers, with the empty string
/// meaning missing (stored as NaN until clean()). The label vocabulary
/// follows `label_order` when given and first-appearance order otherwise.
inline Dataset load_csv(const std::string& path, const std::string& label_column,
                        const std::vector<std::string>& label_order = {}) {
    const Table t = read_table(path);
    std::size_t label_col = t.header.size();
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (t.header[c] == label_column) { label_col = c; break; }
    if (label_col == t.header.size())
        throw DataError("csv: '" + path + "' has no column named '" + label_column + "'");

    Dataset d(t.rows.size(), t.header.size() - 1);
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (c != label_col) d.feature_names.push_back(t.header[c]);
    d.label_names = label_order;
    d.labels.resize(t.rows.size());

    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            const std::string& cell = t.rows[r][c];
            if (c == label_col) {
                std::size_t idx = 0;
                while (idx < d.label_names.size() && d.label_names[idx] != cell) ++idx;
                if (idx == d.label_names.size()) {
                    if (!label_order.empty())
                        throw DataError("csv: row " + std::to_string(r + 1) + " label '" + cell +
                                        "' is not in the configured label order");
                    d.label_names.push_back(cell);
                }
                d.labels[r] = static_cast<int>(idx);
                continue;
            }
            double v;
            if (cell.empty()) {
                v = std::numeric_limits<double>::quiet_NaN();
            } else if (!detail::parse_double(cell, v)) {
                throw DataError("csv: cell at row " + std::to_string(r + 1) + ", column '" +
                                t.header[c] + "' is not a number: '" + cell + "'");
            }
            d.at(r, out_col++) = v;
        }
    }
    d.validate();
    return d;
}

/// Writes a Dataset as CSV: feature columns under their names plus a final
/// label column holding class names. Values are emitted with enough digits
/// to round-trip exactly.
inline void save_csv(const Dataset& d, const std::string& path,
                     const std::string& label_column = "label") {
    std::ofstream out(path);
    if (!out) throw DataError("csv: cannot write '" + path + "'");
    for (std::size_t c = 0; c < d.n_cols(); ++c) {
        const std::string name =
            c < d.feature_names.size() ? d.feature_names[c] : "f" + std::to_string(c);
        out << name << ',';
    }
    out << label_column << '\n';
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.n_cols(); ++c)
            out << detail::format_double(d.at(r, c)) << ',';
        out << d.label_names[static_cast<std::size_t>(d.labels[r])] << '\n';
    }
    if (!out) throw DataError("csv: write to '" + path + "' failed");
}

}  // namespace featbench
