#pragma once

#include <string>
#include <utility>
#include <vector>

#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/gabor.hpp"
#include "featbench/glcm.hpp"
#include "featbench/pgm.hpp"

namespace featbench {

struct LabeledImage {
    GrayImage image;
    int label = 0;
};

/// Column names produced by extraction, in emission order: for each offset o,
/// glcm_d{o}_{contrast,correlation,energy,homogeneity,entropy}; then for
/// each bank entry, gabor_{name}_mean and gabor_{name}_std.
inline std::vector<std::string> radiomics_column_names(const GlcmParams& glcm,
                                                       const GaborBank& bank) {
    std::vector<std::string> cols;
    for (std::size_t o = 0; o < glcm.offsets.size(); ++o)
        for (const std::string& stat : haralick_names())
            cols.push_back("glcm_d" + std::to_string(o) + "_" + stat);
    for (const std::string& name : bank.names) {
        cols.push_back("gabor_" + name + "_mean");
        cols.push_back("gabor_" + name + "_std");
    }
    return cols;
}

/// One dataset row per image, rows in input order. Haralick features need a
/// normalized co-occurrence matrix, so normalize is forced on for the
/// extraction pass.
inline Dataset images_to_dataset(const std::vector<LabeledImage>& items, const GlcmParams& glcm,
                                 const GaborBank& bank,
                                 const std::vector<std::string>& label_names) {
    if (items.empty()) throw DataError("extract: no images");
    if (bank.entries.size() != bank.names.size())
        throw ConfigError("extract: bank entry/name count mismatch");
    GlcmParams glcm_cfg = glcm;
    glcm_cfg.normalize = true;

    std::vector<GaborKernelPair> kernels;
    kernels.reserve(bank.entries.size());
    for (const GaborParams& p : bank.entries) kernels.push_back(gabor_kernel(p));

    const std::vector<std::string> cols = radiomics_column_names(glcm_cfg, bank);
    Dataset out(items.size(), cols.size());
    out.feature_names = cols;
    out.label_names = label_names;
    out.labels.resize(items.size());
    for (std::size_t r = 0; r < items.size(); ++r) {
        const LabeledImage& item = items[r];
        std::size_t col = 0;
        const auto matrices = glcm_compute(item.image, glcm_cfg);
        for (const Glcm& g : matrices)
            for (double v : haralick_features(g)) out.at(r, col++) = v;
        for (const GaborKernelPair& k : kernels) {
            const auto [mean, sd] = gabor_response_stats(item.image, k);
            out.at(r, col++) = mean;
            out.at(r, col++) = sd;
        }
        out.labels[r] = item.label;
    }
    out.validate();
    return out;
}

}  // namespace featbench
