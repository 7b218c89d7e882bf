#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "featbench/errors.hpp"
#include "featbench/kernel.hpp"
#include "featbench/rng.hpp"
#include "featbench/svm.hpp"
#include "test_util.hpp"

using namespace featbench;
using testutil::make_dataset;

namespace {

/// Two 2-D blobs separated well beyond their spread.
Dataset blob_dataset(std::uint64_t seed, std::size_t per_class, double gap = 4.0) {
    Rng rng(seed);
    Dataset d(2 * per_class, 2);
    d.labels.resize(2 * per_class);
    d.label_names = {"a", "b"};
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int y = i < per_class ? 0 : 1;
        d.labels[i] = y;
        d.at(i, 0) = gap * y + 0.3 * rng.next_gaussian();
        d.at(i, 1) = gap * y + 0.3 * rng.next_gaussian();
    }
    d.feature_names = {"x0", "x1"};
    return d;
}

Dataset xor_dataset() {
    auto d = make_dataset({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 0, 1, 1}, {"same", "diff"});
    return d;
}

/// Asserts the KKT margin condition on every stored support vector whose
/// dual magnitude is strictly inside (0, C).
void expect_kkt_margins(const SvmModel& model, double slack) {
    for (const BinarySvm& m : model.machines) {
        for (std::size_t s = 0; s < m.n_support(); ++s) {
            const double alpha = std::abs(m.dual_coeffs[s]);
            if (alpha <= 1e-9 || alpha >= model.params.c - 1e-9) continue;
            const double f = m.decision(m.support_vector(s));
            EXPECT_NEAR(std::abs(f), 1.0, slack);
        }
    }
}

}  // namespace

TEST(Kernel, GaussianIdentityAndDirectValue) {
    const KernelParams k{.kind = KernelKind::gaussian, .sigma = 1.0};
    const std::vector<double> x{0.25, -1.5};
    EXPECT_DOUBLE_EQ(kernel_eval(k, x, x), 1.0);
    const std::vector<double> a{0.0, 0.0}, b{1.0, 1.0};  // squared distance 2
    EXPECT_NEAR(kernel_eval(k, a, b), std::exp(-1.0), 1e-12);
}

TEST(Kernel, LinearIsDotProduct) {
    const KernelParams k{.kind = KernelKind::linear};
    const std::vector<double> a{1.0, 2.0, -3.0}, b{4.0, 0.5, 2.0};
    EXPECT_DOUBLE_EQ(kernel_eval(k, a, b), 4.0 + 1.0 - 6.0);
}

TEST(Kernel, SymmetricOnSeededPairs) {
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        const KernelParams k{.kind = i % 2 ? KernelKind::gaussian : KernelKind::linear,
                             .sigma = 0.5 + rng.next_unit()};
        std::vector<double> a(3), b(3);
        for (int j = 0; j < 3; ++j) {
            a[static_cast<std::size_t>(j)] = rng.next_gaussian();
            b[static_cast<std::size_t>(j)] = rng.next_gaussian();
        }
        EXPECT_EQ(kernel_eval(k, a, b), kernel_eval(k, b, a));
    }
}

TEST(Kernel, ErrorsAndResolution) {
    const std::vector<double> a{1.0}, b{1.0, 2.0};
    EXPECT_THROW(kernel_eval({.kind = KernelKind::linear}, a, b), DataError);
    EXPECT_THROW(kernel_eval({.kind = KernelKind::gaussian, .sigma = 0.0}, a, a), ConfigError);

    // Median pairwise distance of 1-D points {0, 1, 3}: distances {1, 2, 3}.
    const auto d = make_dataset({{0.0}, {1.0}, {3.0}}, {0, 0, 1}, {"a", "b"});
    EXPECT_DOUBLE_EQ(median_pairwise_distance(d), 2.0);
    const KernelParams resolved = resolve_kernel({.kind = KernelKind::gaussian, .sigma = 0.0}, d);
    EXPECT_DOUBLE_EQ(resolved.sigma, 2.0);
    const KernelParams kept = resolve_kernel({.kind = KernelKind::gaussian, .sigma = 1.5}, d);
    EXPECT_DOUBLE_EQ(kept.sigma, 1.5);
}

TEST(Svm, TwoPointAnalyticSolution) {
    const auto d = make_dataset({{-1.0}, {1.0}}, {0, 1}, {"neg", "pos"});
    const SvmModel model = svm_train(d, {.c = 1000.0, .kernel = {.kind = KernelKind::linear}});
    ASSERT_EQ(model.machines.size(), 1u);
    const BinarySvm& m = model.machines[0];

    const std::vector<double> at_neg{-1.0}, at_pos{1.0};
    EXPECT_NEAR(m.decision(at_neg), -1.0, 1e-2);
    EXPECT_NEAR(m.decision(at_pos), 1.0, 1e-2);
    EXPECT_NEAR(m.bias, 0.0, 1e-2);

    const std::vector<double> w = svm_linear_weights(m);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NEAR(w[0], 1.0, 1e-2);

    // Both points are support vectors with alpha = 0.5 (dual_coeffs = alpha * y).
    ASSERT_EQ(m.n_support(), 2u);
    for (std::size_t s = 0; s < 2; ++s) EXPECT_NEAR(std::abs(m.dual_coeffs[s]), 0.5, 1e-2);
}

TEST(Svm, SeparableBlobsTrainPerfectly) {
    const Dataset d = blob_dataset(31, 20);
    const SvmModel model = svm_train(d, {.c = 1.0, .kernel = {.kind = KernelKind::linear}});
    const auto pred = svm_predict(model, d);
    EXPECT_EQ(testutil::accuracy_of(d.labels, pred), 1.0);
    // A training point maps to its own label.
    EXPECT_EQ(svm_predict_row(model, d.row(0)), d.labels[0]);
    EXPECT_EQ(svm_predict_row(model, d.row(25)), d.labels[25]);
    expect_kkt_margins(model, model.params.tol + 1e-6);
}

TEST(Svm, XorNeedsGaussianKernel) {
    const Dataset d = xor_dataset();
    const SvmModel gaussian = svm_train(
        d, {.c = 10.0, .kernel = {.kind = KernelKind::gaussian, .sigma = 0.5}});
    EXPECT_EQ(testutil::accuracy_of(d.labels, svm_predict(gaussian, d)), 1.0);

    const SvmModel linear = svm_train(d, {.c = 10.0, .kernel = {.kind = KernelKind::linear}});
    EXPECT_LT(testutil::accuracy_of(d.labels, svm_predict(linear, d)), 1.0);
}

TEST(Svm, BinaryDecisionSignRule) {
    BinarySvm m;
    m.n_features = 1;
    m.kernel = {.kind = KernelKind::linear};
    m.support_vectors = {0.0};
    m.dual_coeffs = {1.0};
    SvmModel model;
    model.n_classes = 2;
    model.n_features = 1;
    model.machines = {m};

    const std::vector<double> x{0.0};
    model.machines[0].bias = 2.0;
    EXPECT_EQ(svm_predict_row(model, x), 1);
    model.machines[0].bias = -2.0;
    EXPECT_EQ(svm_predict_row(model, x), 0);
    model.machines[0].bias = 0.0;
    EXPECT_EQ(svm_predict_row(model, x), 0);
}

TEST(Svm, OneVsRestTieBreaksToLowestClass) {
    BinarySvm stub;
    stub.n_features = 1;
    stub.kernel = {.kind = KernelKind::linear};
    stub.support_vectors = {0.0};
    stub.dual_coeffs = {1.0};
    SvmModel model;
    model.n_classes = 3;
    model.n_features = 1;
    model.machines = {stub, stub, stub};
    model.machines[0].bias = 0.4;
    model.machines[1].bias = 0.4;
    model.machines[2].bias = -1.0;
    const std::vector<double> x{0.0};
    EXPECT_EQ(svm_predict_row(model, x), 0);
}

TEST(Svm, ThreeClassBlobsOneVsRest) {
    Rng rng(8);
    Dataset d(60, 2);
    d.labels.resize(60);
    d.label_names = {"a", "b", "c"};
    const double centers[3][2] = {{0, 0}, {6, 0}, {0, 6}};
    for (std::size_t i = 0; i < 60; ++i) {
        const int y = static_cast<int>(i % 3);
        d.labels[i] = y;
        d.at(i, 0) = centers[y][0] + 0.4 * rng.next_gaussian();
        d.at(i, 1) = centers[y][1] + 0.4 * rng.next_gaussian();
    }
    const SvmModel model = svm_train(d, {.c = 1.0, .kernel = {.kind = KernelKind::linear}});
    ASSERT_EQ(model.machines.size(), 3u);
    EXPECT_EQ(testutil::accuracy_of(d.labels, svm_predict(model, d)), 1.0);
    expect_kkt_margins(model, model.params.tol + 1e-6);
}

TEST(Svm, KktMarginsOnSeededBlobs) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Dataset d = blob_dataset(100 + seed, 15, 2.0);
        const SvmModel model = svm_train(d, {.c = 5.0, .kernel = {.kind = KernelKind::linear}});
        expect_kkt_margins(model, model.params.tol + 1e-6);
        for (const BinarySvm& m : model.machines)
            for (double a : m.dual_coeffs) EXPECT_LE(std::abs(a), model.params.c + 1e-9);
    }
}

TEST(Svm, DeterministicPerSeed) {
    const Dataset d = blob_dataset(77, 12, 1.5);
    const SvmParams params{.c = 1.0, .kernel = {.kind = KernelKind::linear}, .seed = 3};
    const SvmModel a = svm_train(d, params);
    const SvmModel b = svm_train(d, params);
    ASSERT_EQ(a.machines.size(), b.machines.size());
    for (std::size_t m = 0; m < a.machines.size(); ++m) {
        EXPECT_EQ(a.machines[m].dual_coeffs, b.machines[m].dual_coeffs);
        EXPECT_EQ(a.machines[m].support_vectors, b.machines[m].support_vectors);
        EXPECT_EQ(a.machines[m].bias, b.machines[m].bias);
    }
}

TEST(Svm, JointScalingLeavesGaussianPredictionsUnchanged) {
    const double scale = 2.0;  // power of two keeps the arithmetic exact
    const Dataset d = blob_dataset(55, 10, 2.0);
    Dataset scaled = d;
    for (std::size_t r = 0; r < scaled.n_rows(); ++r)
        for (std::size_t c = 0; c < scaled.n_cols(); ++c) scaled.at(r, c) = d.at(r, c) * scale;

    const SvmModel base = svm_train(
        d, {.c = 2.0, .kernel = {.kind = KernelKind::gaussian, .sigma = 1.0}});
    const SvmModel big = svm_train(
        scaled, {.c = 2.0, .kernel = {.kind = KernelKind::gaussian, .sigma = scale}});

    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x{4.0 * rng.next_unit(), 4.0 * rng.next_unit()};
        std::vector<double> sx{x[0] * scale, x[1] * scale};
        EXPECT_EQ(svm_predict_row(base, x), svm_predict_row(big, sx));
    }
}

TEST(Svm, RejectsInvalidInput) {
    const Dataset d = blob_dataset(1, 5);
    EXPECT_THROW(svm_train(d, {.c = 0.0}), ConfigError);
    EXPECT_THROW(svm_train(d, {.c = 1.0, .kernel = {}, .tol = 0.0}), ConfigError);
    SvmParams bad_passes;
    bad_passes.max_passes = 0;
    EXPECT_THROW(svm_train(d, bad_passes), ConfigError);

    Dataset empty(0, 2);
    empty.label_names = {"a", "b"};
    EXPECT_THROW(svm_train(empty, {}), DataError);

    auto single = make_dataset({{0.0}, {1.0}}, {0, 0}, {"a", "b"});
    EXPECT_THROW(svm_train(single, {}), DataError);

    const SvmModel model = svm_train(d, {});
    const std::vector<double> wrong_dim{1.0, 2.0, 3.0};
    EXPECT_THROW(svm_predict_row(model, wrong_dim), DataError);
}
