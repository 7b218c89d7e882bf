#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "featbench/errors.hpp"
#include "featbench/naive_bayes.hpp"
#include "featbench/neural_net.hpp"
#include "featbench/rng.hpp"
#include "test_util.hpp"

using namespace featbench;
using testutil::make_dataset;

namespace {

Dataset two_gaussians(std::uint64_t seed, std::size_t per_class, double gap, double spread) {
    Rng rng(seed);
    Dataset d(2 * per_class, 1);
    d.labels.resize(2 * per_class);
    d.label_names = {"lo", "hi"};
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int y = i < per_class ? 0 : 1;
        d.labels[i] = y;
        d.at(i, 0) = gap * y + spread * rng.next_gaussian();
    }
    d.feature_names = {"x"};
    return d;
}

}  // namespace

TEST(NaiveBayes, SeparatedGaussiansClassifyWell) {
    double acc_sum = 0.0;
    const int n_seeds = 10;
    for (std::uint64_t seed = 0; seed < n_seeds; ++seed) {
        const Dataset all = two_gaussians(seed, 100, 10.0, 0.5);
        const auto [train, test] = stratified_split(all, {.train_fraction = 0.65, .seed = seed});
        const NbModel m = nb_train(train);
        acc_sum += testutil::accuracy_of(test.labels, nb_predict(m, test));
    }
    EXPECT_GT(acc_sum / n_seeds, 0.95);
}

TEST(NaiveBayes, PosteriorsFormDistribution) {
    const Dataset d = two_gaussians(4, 30, 3.0, 1.0);
    const NbModel m = nb_train(d);
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{rng.next_uniform(-5.0, 8.0)};
        const auto p = nb_predict_proba_row(m, x);
        double sum = 0.0;
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(NaiveBayes, SingleSamplePerClassActsNearestMean) {
    const auto d = make_dataset({{0.0, 1.0}, {4.0, -2.0}}, {0, 1}, {"a", "b"});
    const NbModel m = nb_train(d);
    EXPECT_EQ(nb_predict_row(m, d.row(0)), 0);
    EXPECT_EQ(nb_predict_row(m, d.row(1)), 1);
}

TEST(NaiveBayes, PosteriorTieBreaksToLowestClass) {
    // Both classes see identical training data, so posteriors tie everywhere.
    const auto d = make_dataset({{1.0}, {2.0}, {1.0}, {2.0}}, {0, 0, 1, 1}, {"a", "b"});
    const NbModel m = nb_train(d);
    const std::vector<double> x{1.5};
    EXPECT_EQ(nb_predict_row(m, x), 0);
}

TEST(NaiveBayes, VarianceFloorKeepsConstantFeaturesFinite) {
    const auto d = make_dataset({{5.0, 0.0}, {5.0, 1.0}, {5.0, 0.5}, {5.0, 1.5}},
                                {0, 0, 1, 1}, {"a", "b"});
    const NbModel m = nb_train(d);
    EXPECT_GT(m.variance_floor, 0.0);
    for (double v : m.variances) EXPECT_GE(v, m.variance_floor);
    const auto p = nb_predict_proba_row(m, d.row(0));
    for (double v : p) EXPECT_TRUE(std::isfinite(v));
}

TEST(NaiveBayes, AbsentClassNeverPredicted) {
    auto d = make_dataset({{0.0}, {0.5}, {8.0}, {8.5}}, {0, 0, 2, 2}, {"a", "b", "c"});
    const NbModel m = nb_train(d);
    EXPECT_TRUE(std::isinf(m.log_priors[1]));
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> x{rng.next_uniform(-2.0, 10.0)};
        EXPECT_NE(nb_predict_row(m, x), 1);
    }
}

TEST(NaiveBayes, RejectsEmptyTraining) {
    Dataset empty(0, 2);
    empty.label_names = {"a", "b"};
    EXPECT_THROW(nb_train(empty), DataError);
}

TEST(NeuralNet, GradientCheckOnSeededPairs) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const std::size_t inputs = 2 + rng.next_index(5);
        const std::size_t hidden = 1 + rng.next_index(8);
        const std::size_t outputs = 2 + rng.next_index(3);
        const NnModel m = nn_init(inputs, hidden, outputs, mix_seed(seed, 0xAB));
        std::vector<double> x(inputs);
        for (double& v : x) v = rng.next_gaussian();
        const int label = static_cast<int>(rng.next_index(outputs));
        EXPECT_LT(nn_gradient_check(m, x, label), 1e-4) << "seed " << seed;
    }
}

TEST(NeuralNet, SoftmaxOutputsFormDistribution) {
    const NnModel m = nn_init(3, 5, 4, 42);
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
        const auto p = nn_predict_proba_row(m, x);
        double sum = 0.0;
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            sum += v;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(NeuralNet, LearnsXorOnMostSeeds) {
    const auto d = make_dataset({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {0, 0, 1, 1},
                                {"same", "diff"});
    int solved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const NnModel m = nn_train(d, {.hidden = 4, .lr = 0.5, .epochs = 5000, .seed = seed});
        if (testutil::accuracy_of(d.labels, nn_predict(m, d)) == 1.0) ++solved;
    }
    EXPECT_GE(solved, 8);
}

TEST(NeuralNet, DeterministicPerSeed) {
    const Dataset d = two_gaussians(3, 20, 4.0, 1.0);
    const NnParams params{.hidden = 6, .lr = 0.1, .epochs = 50, .seed = 12};
    const NnModel a = nn_train(d, params);
    const NnModel b = nn_train(d, params);
    EXPECT_EQ(a.w1, b.w1);
    EXPECT_EQ(a.b1, b.b1);
    EXPECT_EQ(a.w2, b.w2);
    EXPECT_EQ(a.b2, b.b2);
    const NnModel c = nn_train(d, {.hidden = 6, .lr = 0.1, .epochs = 50, .seed = 13});
    EXPECT_NE(a.w1, c.w1);
}

TEST(NeuralNet, TrainsSimpleSeparableProblem) {
    const Dataset d = two_gaussians(15, 40, 6.0, 0.8);
    const NnModel m = nn_train(d, {.hidden = 8, .lr = 0.5, .epochs = 400, .seed = 1});
    EXPECT_GE(testutil::accuracy_of(d.labels, nn_predict(m, d)), 0.95);
}

TEST(NeuralNet, InitStaysInsideUniformRange) {
    const NnModel m = nn_init(4, 3, 2, 99);
    for (const auto* block : {&m.w1, &m.b1, &m.w2, &m.b2})
        for (double v : *block) {
            EXPECT_GT(v, -0.5);
            EXPECT_LT(v, 0.5);
        }
}

TEST(NeuralNet, RejectsBadInput) {
    const Dataset d = two_gaussians(5, 10, 4.0, 1.0);
    EXPECT_THROW(nn_train(d, {.hidden = 0}), ConfigError);
    EXPECT_THROW(nn_train(d, {.hidden = 4, .lr = 0.0}), ConfigError);
    Dataset empty(0, 1);
    empty.label_names = {"a", "b"};
    EXPECT_THROW(nn_train(empty, {}), DataError);

    Dataset one_class = two_gaussians(6, 10, 4.0, 1.0);
    one_class.label_names = {"only"};
    for (auto& y : one_class.labels) y = 0;
    EXPECT_THROW(nn_train(one_class, {}), DataError);

    const NnModel m = nn_train(d, {.hidden = 2, .lr = 0.1, .epochs = 5, .seed = 0});
    const std::vector<double> wrong{1.0, 2.0};
    EXPECT_THROW(nn_predict_row(m, wrong), DataError);
}
