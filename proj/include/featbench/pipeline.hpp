#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <initializer_list>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "featbench/classifier.hpp"
#include "featbench/csv.hpp"
#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/feature_select.hpp"
#include "featbench/gabor.hpp"
#include "featbench/glcm.hpp"
#include "featbench/metrics.hpp"
#include "featbench/pgm.hpp"
#include "featbench/radiomics.hpp"
#include "featbench/report.hpp"
#include "featbench/rng.hpp"
#include "featbench/sds.hpp"

namespace featbench {

struct DataConfig {
    enum class Kind { csv, synth, images } kind = Kind::csv;
    // csv
    std::string path;
    std::string label_column = "label";
    std::vector<std::string> label_order;
    // synth
    SynthSpec synth;
    bool synth_seed_set = false;
    // images
    std::string dir;
    GlcmParams glcm;
    std::vector<double> gabor_thetas;       // empty = default bank
    std::vector<double> gabor_frequencies;  // paired with gabor_thetas
};

struct SelectorConfig {
    enum class Kind { none, chi2, kernel_relevance, svm_rfe, sds } kind = Kind::none;
    std::string display = "none";
    std::size_t k = 0;           // chi2 / kernel_relevance / svm_rfe
    std::size_t bins = 10;       // chi2
    double sigma = 0.0;          // kernel_relevance; 0 = median heuristic
    double tol = 1e-3;           // kernel_relevance
    std::size_t max_iter = 50;   // kernel_relevance
    std::size_t step = 1;        // svm_rfe
    double step_fraction = 0.0;  // svm_rfe; 0 = fixed step
    double c = 1.0;              // svm_rfe
    SdsConfig sds;               // sds (seed field overridden per repeat)
};

struct ReportConfig {
    ReportFormat format = ReportFormat::markdown;
    bool timing = true;
    std::size_t repeats = 1;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    DataConfig data;
    bool clean = true;
    SplitConfig split{0.65, 0, true};  // seed field derived per repeat
    std::vector<SelectorConfig> selectors;
    std::vector<ClassifierSpec> classifiers;
    ReportConfig report;
};

namespace cfg {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config: " + path + ": " + msg);
}

inline void check_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

inline void check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    check_object(j, path);
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) fail(path, "unknown key '" + key + "'");
    }
}

inline const json* find(const json& j, const char* key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline const json& require(const json& j, const std::string& path, const char* key) {
    const json* v = find(j, key);
    if (!v) fail(path, std::string("missing required key '") + key + "'");
    return *v;
}

inline bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(path + "." + key, "expected a boolean");
    return v->get<bool>();
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

inline double get_number(const json& j, const std::string& path, const char* key,
                         double fallback) {
    const json* v = find(j, key);
    return v ? as_number(*v, path + "." + key) : fallback;
}

inline std::uint64_t as_uint(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(path, "expected a nonnegative integer");
}

inline std::uint64_t get_uint(const json& j, const std::string& path, const char* key,
                              std::uint64_t fallback) {
    const json* v = find(j, key);
    return v ? as_uint(*v, path + "." + key) : fallback;
}

inline int get_int(const json& j, const std::string& path, const char* key, int fallback) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (!v->is_number_integer() && !v->is_number_unsigned())
        fail(path + "." + key, "expected an integer");
    return v->get<int>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

inline std::string get_string(const json& j, const std::string& path, const char* key,
                              const std::string& fallback) {
    const json* v = find(j, key);
    return v ? as_string(*v, path + "." + key) : fallback;
}

inline ClassifierSpec parse_classifier(const json& j, const std::string& path) {
    check_object(j, path);
    const std::string type = as_string(require(j, path, "type"), path + ".type");
    if (type == "svm") {
        check_keys(j, path, {"type", "c", "kernel", "sigma", "tol", "max_passes"});
        SvmParams p;
        p.c = get_number(j, path, "c", 1.0);
        if (p.c <= 0.0) fail(path + ".c", "must be positive");
        const std::string kernel = get_string(j, path, "kernel", "linear");
        if (kernel == "linear")
            p.kernel.kind = KernelKind::linear;
        else if (kernel == "gaussian")
            p.kernel.kind = KernelKind::gaussian;
        else
            fail(path + ".kernel", "must be 'linear' or 'gaussian'");
        p.kernel.sigma = get_number(j, path, "sigma", 0.0);
        if (p.kernel.sigma < 0.0) fail(path + ".sigma", "must be >= 0 (0 = median heuristic)");
        p.tol = get_number(j, path, "tol", 1e-3);
        if (p.tol <= 0.0) fail(path + ".tol", "must be positive");
        p.max_passes = static_cast<int>(get_uint(j, path, "max_passes", 10));
        if (p.max_passes < 1) fail(path + ".max_passes", "must be >= 1");
        return p;
    }
    if (type == "tree") {
        check_keys(j, path, {"type", "max_depth", "min_split"});
        TreeParams p;
        p.max_depth = get_int(j, path, "max_depth", -1);
        if (p.max_depth < -1) fail(path + ".max_depth", "must be >= -1 (-1 = unlimited)");
        p.min_split = get_uint(j, path, "min_split", 2);
        if (p.min_split < 2) fail(path + ".min_split", "must be >= 2");
        return p;
    }
    if (type == "forest") {
        check_keys(j, path, {"type", "n_trees", "features_per_split", "bootstrap", "max_depth",
                             "min_split"});
        ForestParams p;
        p.n_trees = get_uint(j, path, "n_trees", 100);
        if (p.n_trees < 1) fail(path + ".n_trees", "must be >= 1");
        p.features_per_split = get_uint(j, path, "features_per_split", 0);
        p.bootstrap = get_bool(j, path, "bootstrap", true);
        p.tree.max_depth = get_int(j, path, "max_depth", -1);
        if (p.tree.max_depth < -1) fail(path + ".max_depth", "must be >= -1");
        p.tree.min_split = get_uint(j, path, "min_split", 2);
        if (p.tree.min_split < 2) fail(path + ".min_split", "must be >= 2");
        return p;
    }
    if (type == "nb") {
        check_keys(j, path, {"type"});
        return NbParams{};
    }
    if (type == "nn") {
        check_keys(j, path, {"type", "hidden", "lr", "epochs"});
        NnParams p;
        p.hidden = get_uint(j, path, "hidden", 16);
        if (p.hidden < 1) fail(path + ".hidden", "must be >= 1");
        p.lr = get_number(j, path, "lr", 0.01);
        if (p.lr <= 0.0) fail(path + ".lr", "must be positive");
        p.epochs = get_uint(j, path, "epochs", 200);
        return p;
    }
    fail(path + ".type", "unknown classifier '" + type +
                             "' (expected svm, tree, forest, nb, or nn)");
}

inline SelectorConfig parse_selector(const json& j, const std::string& path) {
    check_object(j, path);
    SelectorConfig s;
    const std::string type = as_string(require(j, path, "type"), path + ".type");
    if (type == "none") {
        check_keys(j, path, {"type"});
        s.kind = SelectorConfig::Kind::none;
        s.display = "none";
        return s;
    }
    if (type == "chi2") {
        check_keys(j, path, {"type", "k", "bins"});
        s.kind = SelectorConfig::Kind::chi2;
        s.display = "chi2";
        s.k = as_uint(require(j, path, "k"), path + ".k");
        if (s.k < 1) fail(path + ".k", "must be >= 1");
        s.bins = get_uint(j, path, "bins", 10);
        if (s.bins < 2) fail(path + ".bins", "must be >= 2");
        return s;
    }
    if (type == "kernel_relevance") {
        check_keys(j, path, {"type", "k", "sigma", "tol", "max_iter"});
        s.kind = SelectorConfig::Kind::kernel_relevance;
        s.display = "kernel-relevance";
        s.k = as_uint(require(j, path, "k"), path + ".k");
        if (s.k < 1) fail(path + ".k", "must be >= 1");
        s.sigma = get_number(j, path, "sigma", 0.0);
        if (s.sigma < 0.0) fail(path + ".sigma", "must be >= 0 (0 = median heuristic)");
        s.tol = get_number(j, path, "tol", 1e-3);
        if (s.tol <= 0.0) fail(path + ".tol", "must be positive");
        s.max_iter = get_uint(j, path, "max_iter", 50);
        return s;
    }
    if (type == "svm_rfe") {
        check_keys(j, path, {"type", "k", "step", "step_fraction", "c"});
        s.kind = SelectorConfig::Kind::svm_rfe;
        s.display = "SVM-RFE";
        s.k = as_uint(require(j, path, "k"), path + ".k");
        if (s.k < 1) fail(path + ".k", "must be >= 1");
        s.step = get_uint(j, path, "step", 1);
        if (s.step < 1) fail(path + ".step", "must be >= 1");
        s.step_fraction = get_number(j, path, "step_fraction", 0.0);
        if (s.step_fraction < 0.0 || s.step_fraction >= 1.0)
            fail(path + ".step_fraction", "must be in [0,1)");
        s.c = get_number(j, path, "c", 1.0);
        if (s.c <= 0.0) fail(path + ".c", "must be positive");
        return s;
    }
    if (type == "sds") {
        check_keys(j, path, {"type", "n_agents", "max_iterations", "mutation_rate",
                             "init_density", "train_fraction", "classifier",
                             "convergence_fraction"});
        s.kind = SelectorConfig::Kind::sds;
        s.display = "SDS";
        s.sds.n_agents = get_uint(j, path, "n_agents", 50);
        s.sds.max_iterations = get_uint(j, path, "max_iterations", 100);
        s.sds.mutation_rate = get_number(j, path, "mutation_rate", -1.0);
        s.sds.init_density = get_number(j, path, "init_density", 0.5);
        s.sds.fitness_split.train_fraction = get_number(j, path, "train_fraction", 0.8);
        s.sds.convergence_fraction = get_number(j, path, "convergence_fraction", 0.33);
        if (const json* c = find(j, "classifier"))
            s.sds.classifier = parse_classifier(*c, path + ".classifier");
        try {
            sds_validate(s.sds);
        } catch (const ConfigError& e) {
            fail(path, e.what());
        }
        return s;
    }
    fail(path + ".type",
         "unknown selector '" + type +
             "' (expected none, chi2, kernel_relevance, svm_rfe, or sds)");
}

inline DataConfig parse_data(const json& j, const std::string& path) {
    check_object(j, path);
    DataConfig d;
    const std::string type = as_string(require(j, path, "type"), path + ".type");
    if (type == "csv") {
        check_keys(j, path, {"type", "path", "label_column", "label_order"});
        d.kind = DataConfig::Kind::csv;
        d.path = as_string(require(j, path, "path"), path + ".path");
        d.label_column = get_string(j, path, "label_column", "label");
        if (const json* order = find(j, "label_order")) {
            if (!order->is_array()) fail(path + ".label_order", "expected an array of strings");
            for (std::size_t i = 0; i < order->size(); ++i) {
                const std::string name = as_string((*order)[i], path + ".label_order[" +
                                                                    std::to_string(i) + "]");
                if (name.empty())
                    fail(path + ".label_order[" + std::to_string(i) + "]", "empty class name");
                d.label_order.push_back(name);
            }
        }
        return d;
    }
    if (type == "synth") {
        check_keys(j, path, {"type", "n_samples", "n_features", "n_informative", "n_classes",
                             "noise_scale", "class_weights", "seed"});
        d.kind = DataConfig::Kind::synth;
        d.synth.n_samples = as_uint(require(j, path, "n_samples"), path + ".n_samples");
        d.synth.n_features = as_uint(require(j, path, "n_features"), path + ".n_features");
        d.synth.n_informative = as_uint(require(j, path, "n_informative"), path + ".n_informative");
        d.synth.n_classes = get_uint(j, path, "n_classes", 2);
        d.synth.noise_scale = get_number(j, path, "noise_scale", 1.0);
        if (const json* w = find(j, "class_weights")) {
            if (!w->is_array()) fail(path + ".class_weights", "expected an array of numbers");
            for (std::size_t i = 0; i < w->size(); ++i)
                d.synth.class_weights.push_back(
                    as_number((*w)[i], path + ".class_weights[" + std::to_string(i) + "]"));
        }
        if (find(j, "seed")) {
            d.synth.seed = as_uint(*find(j, "seed"), path + ".seed");
            d.synth_seed_set = true;
        }
        if (d.synth.n_classes < 2) fail(path + ".n_classes", "must be >= 2");
        if (d.synth.n_informative > d.synth.n_features)
            fail(path + ".n_informative", "must be <= n_features");
        if (d.synth.noise_scale < 0.0) fail(path + ".noise_scale", "must be >= 0");
        return d;
    }
    if (type == "images") {
        check_keys(j, path, {"type", "dir", "glcm", "gabor"});
        d.kind = DataConfig::Kind::images;
        d.dir = as_string(require(j, path, "dir"), path + ".dir");
        if (const json* g = find(j, "glcm")) {
            const std::string gpath = path + ".glcm";
            check_keys(*g, gpath, {"levels", "offsets", "symmetric", "normalize"});
            d.glcm.levels = get_uint(*g, gpath, "levels", 8);
            if (d.glcm.levels < 2 || d.glcm.levels > 256)
                fail(gpath + ".levels", "must be in [2, 256]");
            d.glcm.symmetric = get_bool(*g, gpath, "symmetric", true);
            d.glcm.normalize = get_bool(*g, gpath, "normalize", true);
            if (const json* offs = find(*g, "offsets")) {
                if (!offs->is_array() || offs->empty())
                    fail(gpath + ".offsets", "expected a nonempty array of [di, dj] pairs");
                d.glcm.offsets.clear();
                for (std::size_t i = 0; i < offs->size(); ++i) {
                    const json& pair = (*offs)[i];
                    const std::string ppath = gpath + ".offsets[" + std::to_string(i) + "]";
                    if (!pair.is_array() || pair.size() != 2)
                        fail(ppath, "expected a [di, dj] pair");
                    const int di = static_cast<int>(as_number(pair[0], ppath + "[0]"));
                    const int dj = static_cast<int>(as_number(pair[1], ppath + "[1]"));
                    if (di == 0 && dj == 0) fail(ppath, "offset must be nonzero");
                    d.glcm.offsets.emplace_back(di, dj);
                }
            }
        }
        if (const json* g = find(j, "gabor")) {
            const std::string gpath = path + ".gabor";
            check_keys(*g, gpath, {"thetas", "frequencies"});
            const json& thetas = require(*g, gpath, "thetas");
            const json& freqs = require(*g, gpath, "frequencies");
            if (!thetas.is_array() || thetas.empty())
                fail(gpath + ".thetas", "expected a nonempty array of numbers");
            if (!freqs.is_array() || freqs.empty())
                fail(gpath + ".frequencies", "expected a nonempty array of numbers");
            for (std::size_t i = 0; i < thetas.size(); ++i)
                d.gabor_thetas.push_back(
                    as_number(thetas[i], gpath + ".thetas[" + std::to_string(i) + "]"));
            for (std::size_t i = 0; i < freqs.size(); ++i) {
                const std::string fpath = gpath + ".frequencies[" + std::to_string(i) + "]";
                const double f = as_number(freqs[i], fpath);
                if (f <= 0.0) fail(fpath, "must be positive");
                d.gabor_frequencies.push_back(f);
            }
        }
        return d;
    }
    fail(path + ".type", "unknown data type '" + type + "' (expected csv, synth, or images)");
}

}  // namespace cfg

/// Parses and validates a whole pipeline config. Unknown keys anywhere are
/// rejected; every error names the offending field path.
inline PipelineConfig parse_config(const nlohmann::json& j) {
    using namespace cfg;
    const std::string root = "$";
    check_keys(j, root, {"seed", "data", "preprocess", "split", "selectors", "classifiers",
                         "report"});
    PipelineConfig out;
    out.seed = get_uint(j, root, "seed", 0);
    out.data = parse_data(require(j, root, "data"), root + ".data");
    if (const json* pre = find(j, "preprocess")) {
        check_keys(*pre, root + ".preprocess", {"clean"});
        out.clean = get_bool(*pre, root + ".preprocess", "clean", true);
    }
    if (const json* split = find(j, "split")) {
        const std::string spath = root + ".split";
        check_keys(*split, spath, {"train_fraction", "stratified"});
        out.split.train_fraction = get_number(*split, spath, "train_fraction", 0.65);
        if (out.split.train_fraction <= 0.0 || out.split.train_fraction >= 1.0)
            fail(spath + ".train_fraction", "must be in (0,1)");
        out.split.stratified = get_bool(*split, spath, "stratified", true);
    }
    const json& selectors = require(j, root, "selectors");
    if (!selectors.is_array() || selectors.empty())
        fail(root + ".selectors", "expected a nonempty array");
    for (std::size_t i = 0; i < selectors.size(); ++i)
        out.selectors.push_back(
            parse_selector(selectors[i], root + ".selectors[" + std::to_string(i) + "]"));
    const json& classifiers = require(j, root, "classifiers");
    if (!classifiers.is_array() || classifiers.empty())
        fail(root + ".classifiers", "expected a nonempty array");
    for (std::size_t i = 0; i < classifiers.size(); ++i)
        out.classifiers.push_back(
            parse_classifier(classifiers[i], root + ".classifiers[" + std::to_string(i) + "]"));
    if (const json* rep = find(j, "report")) {
        const std::string rpath = root + ".report";
        check_keys(*rep, rpath, {"format", "timing", "repeats"});
        const std::string format = get_string(*rep, rpath, "format", "markdown");
        if (format == "markdown")
            out.report.format = ReportFormat::markdown;
        else if (format == "csv")
            out.report.format = ReportFormat::csv;
        else
            fail(rpath + ".format", "must be 'markdown' or 'csv'");
        out.report.timing = get_bool(*rep, rpath, "timing", true);
        out.report.repeats = get_uint(*rep, rpath, "repeats", 1);
        if (out.report.repeats < 1) fail(rpath + ".repeats", "must be >= 1");
    }
    return out;
}

/// Reads and parses a JSON config file.
inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_config(j);
}

namespace detail {

inline constexpr std::uint64_t kRepTag = 0xB301;
inline constexpr std::uint64_t kSplitTag = 0xB302;
inline constexpr std::uint64_t kDataTag = 0xB303;
inline constexpr std::uint64_t kSelectorTag = 0xB304;
inline constexpr std::uint64_t kCellTag = 0xB305;

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace detail

/// Loads images laid out as <dir>/<class>/*.pgm. Class names are the
/// subdirectory names in byte order; files load in byte order within each
/// class.
inline Dataset load_image_dataset(const DataConfig& d) {
    namespace fs = std::filesystem;
    std::vector<std::string> class_names;
    try {
        for (const auto& entry : fs::directory_iterator(d.dir))
            if (entry.is_directory()) class_names.push_back(entry.path().filename().string());
    } catch (const fs::filesystem_error& e) {
        throw DataError("images: cannot read directory " + d.dir + ": " + e.what());
    }
    std::sort(class_names.begin(), class_names.end());
    if (class_names.empty()) throw DataError("images: no class directories in " + d.dir);

    std::vector<LabeledImage> items;
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(fs::path(d.dir) / class_names[c]))
            if (entry.is_regular_file() && entry.path().extension() == ".pgm")
                files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw DataError("images: class directory '" + class_names[c] + "' has no .pgm files");
        for (const std::string& file : files)
            items.push_back({load_pgm(file), static_cast<int>(c)});
    }
    const GaborBank bank = d.gabor_thetas.empty()
                               ? default_gabor_bank()
                               : make_gabor_bank(d.gabor_thetas, d.gabor_frequencies);
    return images_to_dataset(items, d.glcm, bank, class_names);
}

/// Materializes the configured data source. A synth source without an
/// explicit seed derives one from the global seed.
inline Dataset load_pipeline_data(const PipelineConfig& cfg) {
    switch (cfg.data.kind) {
        case DataConfig::Kind::csv:
            return load_csv(cfg.data.path, cfg.data.label_column, cfg.data.label_order);
        case DataConfig::Kind::synth: {
            SynthSpec spec = cfg.data.synth;
            if (!cfg.data.synth_seed_set) spec.seed = mix_seed(cfg.seed, detail::kDataTag);
            return synth_generate(spec).data;
        }
        case DataConfig::Kind::images:
            return load_image_dataset(cfg.data);
    }
    throw ConfigError("config: unreachable data kind");
}

/// Everything one selector fit produces; scores/ranking/trace are filled
/// when the selector kind provides them.
struct SelectorArtifacts {
    FeatureMask mask;
    FeatureScores scores;
    RfeRanking ranking;
    std::vector<SdsTraceRow> sds_trace;
    bool has_scores = false;
    bool has_ranking = false;
    bool has_trace = false;
};

/// Fits one selector on the training partition only.
inline SelectorArtifacts fit_selector(const SelectorConfig& sel, const Dataset& train,
                                      std::uint64_t seed) {
    SelectorArtifacts out;
    switch (sel.kind) {
        case SelectorConfig::Kind::none: {
            out.mask.bits.assign(train.n_cols(), 1);
            return out;
        }
        case SelectorConfig::Kind::chi2: {
            out.scores = chi2_binned_scores(train, sel.bins);
            out.has_scores = true;
            out.mask = select_top_k(out.scores, sel.k);
            return out;
        }
        case SelectorConfig::Kind::kernel_relevance: {
            KernelParams kp;
            kp.kind = KernelKind::gaussian;
            kp.sigma = sel.sigma;
            out.scores = kernel_relevance_weights(train, kp, sel.tol, sel.max_iter);
            out.has_scores = true;
            out.mask = select_top_k(out.scores, sel.k);
            return out;
        }
        case SelectorConfig::Kind::svm_rfe: {
            SvmParams p;
            p.c = sel.c;
            p.kernel.kind = KernelKind::linear;
            p.seed = seed;
            out.ranking = svm_rfe(train, p, sel.step, sel.step_fraction);
            out.has_ranking = true;
            if (sel.k > train.n_cols())
                throw ConfigError("config: svm_rfe k exceeds feature count " +
                                  std::to_string(train.n_cols()));
            std::vector<std::size_t> keep;
            for (std::size_t f = 0; f < out.ranking.rank.size(); ++f)
                if (out.ranking.rank[f] <= sel.k) keep.push_back(f);
            out.mask = mask_from_indices(train.n_cols(), keep);
            return out;
        }
        case SelectorConfig::Kind::sds: {
            SdsConfig s = sel.sds;
            s.seed = seed;
            SdsResult result = sds_run(train, s);
            out.mask = std::move(result.best_mask);
            out.sds_trace = std::move(result.trace);
            out.has_trace = true;
            return out;
        }
    }
    throw ConfigError("config: unreachable selector kind");
}

struct RunOptions {
    /// Replaces every test-partition label y with (y+1) mod k after the
    /// split. Selector fits must be unaffected (leakage instrumentation).
    bool poison_test_labels = false;
    /// Called after each selector fit with (repeat, selector index, mask).
    std::function<void(std::size_t, std::size_t, const FeatureMask&)> mask_observer;
    /// Grid cells per parallel batch; <= 1 runs sequentially. Results are
    /// identical for any value.
    unsigned threads = 1;
    /// When nonempty, repeat 0 writes selector scores/rankings/traces here.
    std::string dump_scores_dir;
    /// When nonempty, repeat 0 writes trained model text dumps here.
    std::string dump_models_dir;
};

namespace detail {

inline std::string file_token(std::string s) {
    for (char& c : s)
        if (c == ' ' || c == '/') c = '_';
    return s;
}

struct CellOutcome {
    double train_ms = 0.0;
    double accuracy = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
};

}  // namespace detail

/// Runs the full benchmark grid: one stratified split per repeat, each
/// selector fit on the training partition only, each classifier trained on
/// the masked train rows and scored on the masked test rows. Rows follow
/// config declaration order (selector-major) and average all numeric fields
/// across repeats. Deterministic for a fixed (config, seed) regardless of
/// opts.threads.
inline BenchReport run_pipeline(const PipelineConfig& cfg, const RunOptions& opts = {}) {
    Dataset data = load_pipeline_data(cfg);
    if (cfg.clean) data = clean(data);
    if (data.n_rows() == 0) throw DataError("data: no rows after preprocessing");
    for (const std::string& name : data.label_names)
        if (name.empty()) throw DataError("data: empty class name");
    const std::size_t k = data.n_classes();
    const std::size_t n_sel = cfg.selectors.size();
    const std::size_t n_cls = cfg.classifiers.size();
    const std::size_t n_cells = n_sel * n_cls;

    BenchReport out;
    out.class_names = data.label_names;
    out.include_timing = cfg.report.timing;
    out.rows.resize(n_cells);
    for (std::size_t s = 0; s < n_sel; ++s) {
        for (std::size_t c = 0; c < n_cls; ++c) {
            BenchRow& row = out.rows[s * n_cls + c];
            row.selector = cfg.selectors[s].display;
            row.classifier = classifier_name(cfg.classifiers[c]);
            row.precision.assign(k, 0.0);
            row.recall.assign(k, 0.0);
        }
    }

    for (std::size_t rep = 0; rep < cfg.report.repeats; ++rep) {
        const std::uint64_t rep_seed = mix_seed(cfg.seed, detail::kRepTag, rep);
        SplitConfig split = cfg.split;
        split.seed = mix_seed(rep_seed, detail::kSplitTag);
        auto [train, test] = stratified_split(data, split);
        if (opts.poison_test_labels)
            for (int& y : test.labels) y = (y + 1) % static_cast<int>(k);

        // Selector fits (train partition only).
        std::vector<FeatureMask> masks(n_sel);
        std::vector<double> select_ms(n_sel, 0.0);
        std::vector<Dataset> train_sel(n_sel), test_sel(n_sel);
        for (std::size_t s = 0; s < n_sel; ++s) {
            const auto start = std::chrono::steady_clock::now();
            SelectorArtifacts art;
            try {
                art = fit_selector(cfg.selectors[s], train,
                                   mix_seed(rep_seed, detail::kSelectorTag, s));
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw DataError("selector '" + cfg.selectors[s].display + "': " + e.what());
            }
            select_ms[s] = detail::elapsed_ms(start);
            masks[s] = std::move(art.mask);
            if (opts.mask_observer) opts.mask_observer(rep, s, masks[s]);
            train_sel[s] = apply_mask(train, masks[s]);
            test_sel[s] = apply_mask(test, masks[s]);
            if (rep == 0 && !opts.dump_scores_dir.empty()) {
                const std::string base = opts.dump_scores_dir + "/" + std::to_string(s) + "_" +
                                         detail::file_token(cfg.selectors[s].display);
                if (art.has_scores) {
                    std::ofstream f(base + "_scores.csv");
                    write_scores_csv(f, train.feature_names, art.scores);
                }
                if (art.has_ranking) {
                    std::ofstream f(base + "_ranking.csv");
                    write_ranking_csv(f, train.feature_names, art.ranking);
                }
                if (art.has_trace) {
                    std::ofstream f(base + "_trace.csv");
                    write_sds_trace_csv(f, art.sds_trace);
                }
            }
        }

        // Grid cells.
        auto run_cell = [&](std::size_t s, std::size_t c) {
            detail::CellOutcome cell;
            const auto start = std::chrono::steady_clock::now();
            AnyModel model;
            try {
                model = train_classifier(train_sel[s], cfg.classifiers[c],
                                         mix_seed(rep_seed, detail::kCellTag, s, c));
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw DataError("classifier '" + classifier_name(cfg.classifiers[c]) +
                                "' under selector '" + cfg.selectors[s].display +
                                "': " + e.what());
            }
            cell.train_ms = detail::elapsed_ms(start);
            const auto predictions = predict_any(model, test_sel[s]);
            const auto cm = confusion(test_sel[s].labels, predictions, k);
            const MetricsReport metrics = report(cm);
            cell.accuracy = metrics.accuracy;
            cell.precision.resize(k);
            cell.recall.resize(k);
            for (std::size_t i = 0; i < k; ++i) {
                cell.precision[i] = metrics.per_class[i].precision;
                cell.recall[i] = metrics.per_class[i].recall;
            }
            if (rep == 0 && !opts.dump_models_dir.empty()) {
                std::ofstream f(opts.dump_models_dir + "/" + std::to_string(s) + "_" +
                                std::to_string(c) + "_" +
                                detail::file_token(cfg.selectors[s].display) + "_" +
                                detail::file_token(classifier_name(cfg.classifiers[c])) + ".txt");
                dump_model(model, f);
            }
            return cell;
        };

        std::vector<detail::CellOutcome> cells(n_cells);
        if (opts.threads <= 1) {
            for (std::size_t i = 0; i < n_cells; ++i) cells[i] = run_cell(i / n_cls, i % n_cls);
        } else {
            for (std::size_t base = 0; base < n_cells; base += opts.threads) {
                const std::size_t stop = std::min(n_cells, base + opts.threads);
                std::vector<std::future<detail::CellOutcome>> batch;
                for (std::size_t i = base; i < stop; ++i)
                    batch.push_back(std::async(std::launch::async, run_cell, i / n_cls,
                                               i % n_cls));
                for (std::size_t i = base; i < stop; ++i) cells[i] = batch[i - base].get();
            }
        }

        for (std::size_t i = 0; i < n_cells; ++i) {
            BenchRow& row = out.rows[i];
            const std::size_t s = i / n_cls;
            row.n_features += static_cast<double>(masks[s].count());
            row.accuracy += cells[i].accuracy;
            for (std::size_t cls = 0; cls < k; ++cls) {
                row.precision[cls] += cells[i].precision[cls];
                row.recall[cls] += cells[i].recall[cls];
            }
            row.select_ms += select_ms[s];
            row.train_ms += cells[i].train_ms;
        }
    }

    const auto reps = static_cast<double>(cfg.report.repeats);
    for (BenchRow& row : out.rows) {
        row.n_features /= reps;
        row.accuracy /= reps;
        for (double& v : row.precision) v /= reps;
        for (double& v : row.recall) v /= reps;
        row.select_ms /= reps;
        row.train_ms /= reps;
    }
    return out;
}

}  // namespace featbench
