#include <gtest/gtest.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "featbench/featbench.hpp"
#include "test_util.hpp"

using namespace featbench;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Independent oracles (kept self-contained in this binary).

/// Chi-squared statistic of one feature from first principles: build the
/// bin x class contingency table, compare against the independence
/// expectation, skipping cells whose expected count is zero.
double chi2_oracle_feature(const Dataset& d, std::size_t col) {
    std::size_t max_bin = 0;
    for (std::size_t r = 0; r < d.n_rows(); ++r)
        max_bin = std::max(max_bin, static_cast<std::size_t>(d.at(r, col)));
    const std::size_t n_bins = max_bin + 1;
    const std::size_t k = d.n_classes();
    std::vector<std::vector<double>> obs(n_bins, std::vector<double>(k, 0.0));
    for (std::size_t r = 0; r < d.n_rows(); ++r)
        obs[static_cast<std::size_t>(d.at(r, col))][static_cast<std::size_t>(d.labels[r])] += 1.0;

    std::vector<double> row_sum(n_bins, 0.0), col_sum(k, 0.0);
    double n = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b)
        for (std::size_t c = 0; c < k; ++c) {
            row_sum[b] += obs[b][c];
            col_sum[c] += obs[b][c];
            n += obs[b][c];
        }
    double stat = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b)
        for (std::size_t c = 0; c < k; ++c) {
            const double expected = row_sum[b] * col_sum[c] / n;
            if (expected <= 0.0) continue;
            const double diff = obs[b][c] - expected;
            stat += diff * diff / expected;
        }
    return stat;
}

/// Co-occurrence oracle: enumerate ordered in-bounds pixel pairs, add the
/// transpose when symmetric, divide by the doubled total when normalizing.
std::vector<double> glcm_oracle(const GrayImage& img, std::size_t levels,
                                std::pair<int, int> offset, bool symmetric, bool normalize) {
    std::vector<double> m(levels * levels, 0.0);
    const int h = static_cast<int>(img.height), w = static_cast<int>(img.width);
    double total = 0.0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const int rr = r + offset.first, cc = c + offset.second;
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            const std::size_t a = glcm_quantize(img.at(static_cast<std::size_t>(r),
                                                       static_cast<std::size_t>(c)),
                                                levels);
            const std::size_t b = glcm_quantize(img.at(static_cast<std::size_t>(rr),
                                                       static_cast<std::size_t>(cc)),
                                                levels);
            m[a * levels + b] += 1.0;
            total += 1.0;
        }
    if (symmetric) {
        std::vector<double> sym(levels * levels, 0.0);
        for (std::size_t i = 0; i < levels; ++i)
            for (std::size_t j = 0; j < levels; ++j)
                sym[i * levels + j] = m[i * levels + j] + m[j * levels + i];
        m = sym;
        total *= 2.0;
    }
    if (normalize)
        for (double& v : m) v /= total;
    return m;
}

// ---------------------------------------------------------------------------
// Data helpers.

Dataset random_binned(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 20 + rng.next_index(181);  // <= 200
    const std::size_t d = 1 + rng.next_index(10);    // <= 10
    const std::size_t bins = 2 + rng.next_index(4);  // <= 5
    const std::size_t k = 2 + rng.next_index(2);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c)
            rows[r][c] = static_cast<double>(rng.next_index(bins));
        labels[r] = r < k ? static_cast<int>(r) : static_cast<int>(rng.next_index(k));
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
    return testutil::make_dataset(rows, labels, names);
}

GrayImage random_image(std::uint64_t seed, std::size_t width, std::size_t height) {
    Rng rng(seed);
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(width * height);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.next_index(256));
    return img;
}

Dataset blob_dataset(std::uint64_t seed, std::size_t per_class) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int cls = 0; cls < 2; ++cls) {
        const double center = cls == 0 ? -2.0 : 2.0;
        for (std::size_t i = 0; i < per_class; ++i) {
            rows.push_back({center + 0.3 * rng.next_gaussian(),
                            center + 0.3 * rng.next_gaussian()});
            labels.push_back(cls);
        }
    }
    return testutil::make_dataset(rows, labels, {"neg", "pos"});
}

Dataset random_labeled(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t k) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) rows[r][c] = rng.next_unit() * 4.0 - 2.0;
        labels[r] = r < k ? static_cast<int>(r) : static_cast<int>(rng.next_index(k));
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
    return testutil::make_dataset(rows, labels, names);
}

/// Margin support vectors (0 < alpha < C) must sit on the margin within the
/// training tolerance.
void expect_kkt_margins(const SvmModel& model, double slack) {
    for (const BinarySvm& machine : model.machines) {
        for (std::size_t s = 0; s < machine.n_support(); ++s) {
            const double alpha = std::abs(machine.dual_coeffs[s]);
            if (alpha <= 1e-9 || alpha >= model.params.c - 1e-9) continue;
            const double margin = std::abs(machine.decision(machine.support_vector(s)));
            EXPECT_NEAR(margin, 1.0, slack);
        }
    }
}

std::size_t count_overlap(const FeatureMask& mask, const std::vector<std::size_t>& informative) {
    const std::set<std::size_t> chosen_set(informative.begin(), informative.end());
    std::size_t hits = 0;
    for (std::size_t f : mask.indices()) hits += chosen_set.count(f);
    return hits;
}

double tree_test_accuracy(const Dataset& train, const Dataset& test) {
    const TreeModel model = tree_train(train, {});
    return testutil::accuracy_of(test.labels, tree_predict(model, test));
}

// ---------------------------------------------------------------------------
// Planted-feature benchmark, computed once and shared by criteria 6 and 7.

struct PlantedResults {
    int rfe_all_in_top8 = 0;
    double sds_recovered_sum = 0.0;
    double chi2_recovered_sum = 0.0;
    double sds_acc_sum = 0.0;
    double base_acc_sum = 0.0;
    double rfe_seconds = 0.0;
    double sds_seconds = 0.0;
    double chi2_seconds = 0.0;
    static constexpr int kSeeds = 10;
};

const PlantedResults& planted() {
    static const PlantedResults results = [] {
        PlantedResults out;
        for (std::uint64_t seed = 0; seed < PlantedResults::kSeeds; ++seed) {
            const SynthResult sr = synth_generate({500, 20, 5, 3, 1.0, seed, {}});

            auto start = std::chrono::steady_clock::now();
            SvmParams rfe_params;
            rfe_params.kernel.kind = KernelKind::linear;
            rfe_params.seed = seed;
            const RfeRanking ranking = svm_rfe(sr.data, rfe_params);
            out.rfe_seconds += seconds_since(start);
            bool all_top8 = true;
            for (std::size_t f : sr.informative) all_top8 &= ranking.rank[f] <= 8;
            out.rfe_all_in_top8 += all_top8;

            start = std::chrono::steady_clock::now();
            const FeatureScores scores = chi2_scores(quantile_bin(sr.data, 10));
            const FeatureMask top5 = select_top_k(scores, 5);
            out.chi2_seconds += seconds_since(start);
            out.chi2_recovered_sum += static_cast<double>(count_overlap(top5, sr.informative));

            start = std::chrono::steady_clock::now();
            SdsConfig sds;  // 50 agents, 100 iterations, tree fitness
            sds.seed = seed;
            const SdsResult recovery = sds_run(sr.data, sds);
            out.sds_seconds += seconds_since(start);
            out.sds_recovered_sum += static_cast<double>(count_overlap(recovery.best_mask,
                                                                       sr.informative));

            // Held-out accuracy comparison: the selection mask is fit on the
            // training partition only, then both trees see the same test rows.
            SplitConfig split{0.65, mix_seed(seed, 0xACCE), true};
            const auto [train, test] = stratified_split(sr.data, split);
            const SdsResult res = sds_run(train, sds);
            out.sds_acc_sum += tree_test_accuracy(apply_mask(train, res.best_mask),
                                                  apply_mask(test, res.best_mask));
            out.base_acc_sum += tree_test_accuracy(train, test);
        }
        return out;
    }();
    return results;
}

}  // namespace

class AcceptanceTest : public ::testing::Test {
protected:
    void Criterion(int n, const char* title) {
        n_ = n;
        title_ = title;
    }
    void TearDown() override {
        std::printf("ACCEPTANCE %02d %-22s %s\n", n_, title_, HasFailure() ? "FAIL" : "PASS");
        std::fflush(stdout);
    }

private:
    int n_ = 0;
    const char* title_ = "";
};

TEST_F(AcceptanceTest, Criterion01ChiSquaredOracle) {
    Criterion(1, "chi2-oracle");
    const auto start = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Dataset d = random_binned(seed);
        const FeatureScores got = chi2_scores(d);
        ASSERT_EQ(got.scores.size(), d.n_cols());
        for (std::size_t c = 0; c < d.n_cols(); ++c)
            ASSERT_NEAR(got.scores[c], chi2_oracle_feature(d, c), 1e-9)
                << "seed " << seed << " feature " << c;
    }
    EXPECT_LT(seconds_since(start), 5.0);
}

TEST_F(AcceptanceTest, Criterion02GlcmOracle) {
    Criterion(2, "glcm-oracle");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const std::size_t w = 2 + rng.next_index(7);  // <= 8
        const std::size_t h = 2 + rng.next_index(7);
        const std::size_t levels = 2 + rng.next_index(3);  // <= 4
        const GrayImage img = random_image(seed ^ 0x61C3ull, w, h);
        for (const bool symmetric : {false, true}) {
            for (const bool normalize : {false, true}) {
                GlcmParams p;  // four default offsets
                p.levels = levels;
                p.symmetric = symmetric;
                p.normalize = normalize;
                const auto got = glcm_compute(img, p);
                ASSERT_EQ(got.size(), 4u);
                for (std::size_t o = 0; o < got.size(); ++o)
                    ASSERT_EQ(got[o].matrix,
                              glcm_oracle(img, levels, p.offsets[o], symmetric, normalize))
                        << "seed " << seed << " offset " << o;
            }
        }
    }
}

TEST_F(AcceptanceTest, Criterion03SvmCorrectness) {
    Criterion(3, "svm-correctness");
    // Two opposed points: the dual solution puts alpha = 1/2 on both, giving
    // the decision function f(x) = x.
    const Dataset two = testutil::make_dataset({{-1.0}, {1.0}}, {0, 1}, {"neg", "pos"});
    SvmParams analytic;
    analytic.c = 1000.0;
    const SvmModel pair_model = svm_train(two, analytic);
    for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const std::vector<double> probe{x};
        EXPECT_NEAR(pair_model.machines[0].decision(probe), x, 1e-2);
    }

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset blobs = blob_dataset(seed, 30);
        SvmParams params;
        const SvmModel model = svm_train(blobs, params);
        std::size_t hits = 0;
        for (std::size_t r = 0; r < blobs.n_rows(); ++r)
            hits += svm_predict_row(model, blobs.row(r)) == blobs.labels[r];
        EXPECT_EQ(hits, blobs.n_rows()) << "seed " << seed;
        expect_kkt_margins(model, params.tol + 1e-9);
    }
}

TEST_F(AcceptanceTest, Criterion04NnGradientCheck) {
    Criterion(4, "nn-gradient-check");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(mix_seed(seed, 0x99));
        const std::size_t inputs = 2 + rng.next_index(5);
        const std::size_t hidden = 1 + rng.next_index(8);
        const std::size_t outputs = 2 + rng.next_index(3);
        const NnModel model = nn_init(inputs, hidden, outputs, mix_seed(seed, 0x9A));
        std::vector<double> x(inputs);
        for (double& v : x) v = rng.next_unit() * 4.0 - 2.0;
        const int label = static_cast<int>(rng.next_index(outputs));
        EXPECT_LT(nn_gradient_check(model, x, label), 1e-4) << "seed " << seed;
    }
}

TEST_F(AcceptanceTest, Criterion05ReductionIdentities) {
    Criterion(5, "reduction-identities");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(mix_seed(seed, 0x51));
        const std::size_t n = 10 + rng.next_index(31);
        const std::size_t d = 1 + rng.next_index(5);
        const std::size_t k = 2 + rng.next_index(2);
        const Dataset data = random_labeled(mix_seed(seed, 0x52), n, d, k);
        const Dataset probe = random_labeled(mix_seed(seed, 0x53), 20, d, k);

        const TreeModel tree = tree_train(data, {});
        ForestParams fp;
        fp.n_trees = 1;
        fp.features_per_split = d;
        fp.bootstrap = false;
        fp.seed = seed;
        const ForestModel forest = forest_train(data, fp);
        EXPECT_EQ(forest_predict(forest, data), tree_predict(tree, data)) << "seed " << seed;
        EXPECT_EQ(forest_predict(forest, probe), tree_predict(tree, probe)) << "seed " << seed;
    }

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(mix_seed(seed, 0x54));
        const std::size_t d = 1 + rng.next_index(12);
        FeatureScores scores;
        scores.scores.resize(d);
        for (double& s : scores.scores) s = rng.next_unit();
        const FeatureMask mask = select_top_k(scores, d);
        EXPECT_EQ(mask.count(), d);
        EXPECT_EQ(mask.size(), d);
    }
}

TEST_F(AcceptanceTest, Criterion06PlantedRecovery) {
    Criterion(6, "planted-recovery");
    const PlantedResults& r = planted();
    const double seeds = PlantedResults::kSeeds;
    EXPECT_GE(r.rfe_all_in_top8, 8) << "RFE found all informative in top-8 in only "
                                    << r.rfe_all_in_top8 << "/10 seeds";
    EXPECT_GE(r.sds_recovered_sum / seeds, 4.0);
    EXPECT_GE(r.chi2_recovered_sum / seeds, 4.0);
    EXPECT_LT(r.rfe_seconds, 120.0);
    EXPECT_LT(r.sds_seconds, 120.0);
    EXPECT_LT(r.chi2_seconds, 120.0);
}

TEST_F(AcceptanceTest, Criterion07RuntimeClaim) {
    Criterion(7, "runtime-claim");
    // Microarray-shaped source: 96 samples, 7129 features, imbalanced 86/10.
    const SynthResult sr = synth_generate({96, 7129, 100, 2, 0.5, 31, {86.0, 10.0}});
    SplitConfig split{0.65, 7, true};
    const auto [train, test] = stratified_split(sr.data, split);
    SvmParams svm;
    svm.kernel.kind = KernelKind::linear;
    svm.seed = 1;

    double full_seconds = 1e300, selected_seconds = 1e300;
    double full_acc = 0.0, selected_acc = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        auto start = std::chrono::steady_clock::now();
        const SvmModel full_model = svm_train(train, svm);
        full_seconds = std::min(full_seconds, seconds_since(start));
        full_acc = testutil::accuracy_of(test.labels, svm_predict(full_model, test));

        start = std::chrono::steady_clock::now();
        const FeatureScores scores = chi2_binned_scores(train, 10);
        const FeatureMask mask = select_top_k(scores, 100);
        const Dataset train_sel = apply_mask(train, mask);
        const SvmModel sel_model = svm_train(train_sel, svm);
        selected_seconds = std::min(selected_seconds, seconds_since(start));
        selected_acc =
            testutil::accuracy_of(test.labels, svm_predict(sel_model, apply_mask(test, mask)));
    }
    EXPECT_LT(selected_seconds, 0.5 * full_seconds)
        << "selected " << selected_seconds << "s vs full " << full_seconds << "s";
    EXPECT_NEAR(selected_acc, full_acc, 0.05);

    // Selection must not hurt: SDS-selected accuracy stays within 0.02 of the
    // all-features baseline on the planted benchmark.
    const PlantedResults& r = planted();
    const double seeds = PlantedResults::kSeeds;
    EXPECT_GE(r.sds_acc_sum / seeds, r.base_acc_sum / seeds - 0.02);

    // The report emitter reproduces the published table shape: percentage
    // accuracies in method-major rows.
    BenchReport shape;
    shape.class_names = {"normal", "abnormal"};
    shape.include_timing = false;
    const std::vector<std::pair<std::string, double>> rows{
        {"SDS", 0.8741}, {"chi2", 0.8852}, {"SVM-RFE", 0.8963}};
    for (const auto& [selector, acc] : rows) {
        BenchRow row;
        row.selector = selector;
        row.classifier = "decision tree";
        row.accuracy = acc;
        row.precision = {0.0, 0.0};
        row.recall = {0.0, 0.0};
        shape.rows.push_back(row);
    }
    const std::string text = emit_report(shape, ReportFormat::markdown);
    EXPECT_NE(text.find("| SDS-decision tree | 87.41 |"), std::string::npos) << text;
    EXPECT_NE(text.find("| chi2-decision tree | 88.52 |"), std::string::npos);
    EXPECT_NE(text.find("| SVM-RFE-decision tree | 89.63 |"), std::string::npos);
}

TEST_F(AcceptanceTest, Criterion08Determinism) {
    Criterion(8, "determinism");
    testutil::ScratchDir dir("accept_cli");
    const auto config_path = dir / "config.json";
    testutil::write_file(config_path, R"({
        "seed": 2024,
        "data": {"type": "synth", "n_samples": 90, "n_features": 8, "n_informative": 3},
        "selectors": [{"type": "chi2", "k": 4, "bins": 5}, {"type": "svm_rfe", "k": 3}],
        "classifiers": [{"type": "tree"}, {"type": "nb"}],
        "report": {"format": "markdown", "timing": false}
    })");

    auto run_cli = [&](const std::string& out_name, const std::string& extra) {
        const std::string cmd = std::string(FEATBENCH_BIN) + " run --config " +
                                config_path.string() + " --out " + (dir / out_name).string() +
                                extra + " >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        ASSERT_NE(rc, -1);
        ASSERT_TRUE(WIFEXITED(rc));
        ASSERT_EQ(WEXITSTATUS(rc), 0);
    };
    run_cli("a.md", "");
    run_cli("b.md", "");
    run_cli("c.md", " --threads 4");

    const std::string a = testutil::read_file(dir / "a.md");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a.substr(0, 8), "| method");
    EXPECT_EQ(a, testutil::read_file(dir / "b.md"));
    EXPECT_EQ(a, testutil::read_file(dir / "c.md"));
}

TEST_F(AcceptanceTest, Criterion09LeakageGuard) {
    Criterion(9, "leakage-guard");
    const nlohmann::json j = nlohmann::json::parse(R"({
        "seed": 17,
        "data": {"type": "synth", "n_samples": 120, "n_features": 8, "n_informative": 3},
        "selectors": [
            {"type": "none"},
            {"type": "chi2", "k": 4, "bins": 5},
            {"type": "kernel_relevance", "k": 3, "max_iter": 15},
            {"type": "svm_rfe", "k": 3},
            {"type": "sds", "n_agents": 15, "max_iterations": 10,
             "classifier": {"type": "tree", "max_depth": 3}}
        ],
        "classifiers": [{"type": "nb"}],
        "report": {"timing": false}
    })");
    const PipelineConfig cfg = parse_config(j);

    using MaskMap = std::map<std::pair<std::size_t, std::size_t>, FeatureMask>;
    auto collect = [&](bool poison) {
        MaskMap masks;
        RunOptions opts;
        opts.poison_test_labels = poison;
        opts.mask_observer = [&](std::size_t rep, std::size_t sel, const FeatureMask& m) {
            masks[{rep, sel}] = m;
        };
        run_pipeline(cfg, opts);
        return masks;
    };
    const MaskMap clean_masks = collect(false);
    const MaskMap poisoned_masks = collect(true);
    ASSERT_EQ(clean_masks.size(), cfg.selectors.size());
    ASSERT_EQ(poisoned_masks.size(), clean_masks.size());
    for (const auto& [key, mask] : clean_masks) {
        ASSERT_TRUE(poisoned_masks.count(key));
        EXPECT_TRUE(poisoned_masks.at(key) == mask)
            << "selector " << key.second << " reacted to poisoned test labels";
    }
}

TEST_F(AcceptanceTest, Criterion10MetricDefinitions) {
    Criterion(10, "metric-definitions");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(mix_seed(seed, 0xC4));
        const std::size_t k = 2 + rng.next_index(4);
        ConfusionMatrix cm(k);
        std::vector<std::vector<std::uint64_t>> counts(k, std::vector<std::uint64_t>(k, 0));
        for (std::size_t t = 0; t < k; ++t)
            for (std::size_t p = 0; p < k; ++p) {
                // Zero out some rows/columns to exercise the 0/0 conventions.
                const std::uint64_t v = rng.next_bool(0.2) ? 0 : rng.next_index(30);
                counts[t][p] = v;
                cm.counts(t, p) = v;
            }
        counts[0][0] += 1;  // never empty
        cm.counts(0, 0) += 1;

        std::uint64_t total = 0, diag = 0;
        for (std::size_t t = 0; t < k; ++t)
            for (std::size_t p = 0; p < k; ++p) total += counts[t][p];
        for (std::size_t c = 0; c < k; ++c) diag += counts[c][c];

        const MetricsReport got = report(cm);
        EXPECT_EQ(got.accuracy, static_cast<double>(diag) / static_cast<double>(total));
        double f1_sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            std::uint64_t tp = counts[c][c], row = 0, col = 0;
            for (std::size_t i = 0; i < k; ++i) {
                row += counts[c][i];
                col += counts[i][c];
            }
            const double precision =
                col == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
            const double recall =
                row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
            const double f1 = (precision + recall) == 0.0
                                  ? 0.0
                                  : 2.0 * precision * recall / (precision + recall);
            f1_sum += f1;
            EXPECT_EQ(got.per_class[c].precision, precision);
            EXPECT_EQ(got.per_class[c].recall, recall);
            EXPECT_EQ(got.per_class[c].f1, f1);
        }
        EXPECT_EQ(got.macro_f1, f1_sum / static_cast<double>(k));
    }
}
