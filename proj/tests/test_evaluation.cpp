#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "lann/evaluation.hpp"
#include "test_util.hpp"

namespace lann {
namespace {

using testing::identity_model;
using testing::make_dataset;

TEST(WeightedKnn, AgreesWithIdentityMetricModel) {
    const auto data = load_csv(testing::data_path("wine.csv"));
    const auto model = fit(data, Hyperparams{.epochs = 0}).first;
    const WeightedKnn knn(data, 5, 1e-8);
    Rng rng(6);
    for (int q = 0; q < 200; ++q) {
        const auto base = data.point(rng.below(data.size()));
        std::vector<double> x(base.begin(), base.end());
        for (double& v : x) v *= rng.uniform(0.9, 1.1);
        EXPECT_EQ(knn.predict(x), predict(model, x).label);
    }
}

TEST(CrossValidate, UntrainedLannEqualsKnn) {
    for (const char* name : {"iris.csv", "wine.csv"}) {
        const auto data = load_csv(testing::data_path(name));
        Hyperparams h;
        h.epochs = 0;
        const auto a = cross_validate(data, Algorithm::Lann, h, 42);
        const auto b = cross_validate(data, Algorithm::Knn, h, 42);
        EXPECT_EQ(a.fold_accuracies, b.fold_accuracies) << name;
    }
}

TEST(CrossValidate, SummaryMatchesFolds) {
    const auto data = load_csv(testing::data_path("iris.csv"));
    const auto r = cross_validate(data, Algorithm::Knn, Hyperparams{}, 3, 10, "iris");
    ASSERT_EQ(r.fold_accuracies.size(), 10u);
    const double mean = std::accumulate(r.fold_accuracies.begin(), r.fold_accuracies.end(), 0.0) / 10.0;
    double sq = 0;
    for (double a : r.fold_accuracies) sq += (a - mean) * (a - mean);
    EXPECT_NEAR(r.mean, mean, 1e-15);
    EXPECT_NEAR(r.stddev, std::sqrt(sq / 10.0), 1e-15);
    EXPECT_EQ(r.dataset, "iris");
    EXPECT_EQ(r.seed, 3u);
    for (double a : r.fold_accuracies) {
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
        // each test fold holds 15 points
        EXPECT_NEAR(a * 15.0, std::round(a * 15.0), 1e-9);
    }
}

TEST(CrossValidate, ResultCsv) {
    CvResult r;
    r.fold_accuracies = {1.0, 0.5};
    r.mean = 0.75;
    r.stddev = 0.25;
    r.algorithm = Algorithm::Knn;
    r.dataset = "toy";
    r.seed = 9;
    std::ostringstream out;
    write_cv_result(out, r);
    EXPECT_EQ(out.str(), "dataset,algorithm,seed,mean,std,fold0,fold1\ntoy,knn,9,0.75,0.25,1,0.5\n");
}

TEST(Fingerprints, UntrainedModelIsUniform) {
    const auto data = load_csv(testing::data_path("iris.csv"));
    const auto model = fit(data, Hyperparams{.epochs = 0}).first;
    const auto fp = fingerprints(model);
    EXPECT_EQ(fp.classes, (std::vector<Label>{0, 1, 2}));
    for (const auto& p : fp.profiles) {
        for (double r : p.relevances) EXPECT_NEAR(r, 0.25, 1e-15);
    }
}

TEST(Fingerprints, SingletonClassUsesItsOwnMetric) {
    auto model = identity_model(make_dataset({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {0, 0, 1}, 2));
    const std::vector<double> w{3.0, 1.0};
    model.metrics[2] = normalize_metric(w);
    const auto fp = fingerprints(model);
    EXPECT_NEAR(fp.profiles[1].relevances[0], 0.9, 1e-15);
    EXPECT_NEAR(fp.profiles[1].relevances[1], 0.1, 1e-15);
    EXPECT_NEAR(fp.profiles[0].relevances[0], 0.5, 1e-15);
}

TEST(Fingerprints, ProfilesSumToOneAfterTraining) {
    auto data = generate_classification({.samples = 200, .features = 8});
    Hyperparams h;
    h.epochs = 3;
    h.learning_rate = 1.0;
    const auto model = fit(data, h).first;
    const auto fp = fingerprints(model);
    for (const auto& p : fp.profiles) {
        EXPECT_NEAR(std::accumulate(p.relevances.begin(), p.relevances.end(), 0.0), 1.0, 1e-9);
    }
    std::ostringstream out;
    write_fingerprints(out, fp, model.dataset);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "class,feature,relevance");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 16u);
}

TEST(DistanceMatrix, IdentityMetricsGiveSquaredEuclidean) {
    Rng rng(4);
    auto model = random_model(rng, 40, 3, 2, Hyperparams{});
    for (auto& m : model.metrics) m = identity_metric(3);
    const auto d = export_distance_matrix(model, Symmetrize::None);
    const auto e = euclidean_distance_matrix(model.dataset.points());
    for (std::size_t i = 0; i < 40; ++i) {
        for (std::size_t j = 0; j < 40; ++j) EXPECT_NEAR(d(i, j), e(i, j), 1e-12);
    }
}

TEST(DistanceMatrix, TrainedLicoriceIsAsymmetricUntilSymmetrized) {
    LicoriceParams p;
    p.cylinders = 2;
    p.inside_per_cylinder = 40;
    p.outside_per_cylinder = 40;
    Hyperparams h;
    h.epochs = 5;
    h.learning_rate = 0.2;
    h.beta = 300;
    const auto model = fit(generate_licorice(p), h).first;
    const auto raw = export_distance_matrix(model, Symmetrize::None);
    double asym = 0;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        for (std::size_t j = 0; j < raw.rows(); ++j) asym = std::max(asym, std::abs(raw(i, j) - raw(j, i)));
    }
    EXPECT_GT(asym, 0.0);
    for (auto mode : {Symmetrize::Mean, Symmetrize::Min}) {
        const auto d = export_distance_matrix(model, mode);
        for (std::size_t i = 0; i < d.rows(); ++i) {
            EXPECT_EQ(d(i, i), 0.0);
            for (std::size_t j = 0; j < d.rows(); ++j) {
                EXPECT_EQ(d(i, j), d(j, i));
                EXPECT_GE(d(i, j), 0.0);
            }
        }
    }
    const auto mean = export_distance_matrix(model, Symmetrize::Mean);
    EXPECT_DOUBLE_EQ(mean(0, 1), (raw(0, 1) + raw(1, 0)) / 2);
}

TEST(Reclassify, SeparatedBlobsArePerfect) {
    Rng rng(1);
    Matrix pts(100, 2);
    std::vector<Label> labels(100);
    for (std::size_t i = 0; i < 100; ++i) {
        labels[i] = i % 2;
        pts(i, 0) = rng.normal() + (labels[i] ? 20.0 : 0.0);
        pts(i, 1) = rng.normal();
    }
    EXPECT_EQ(reclassify_by_matrix(euclidean_distance_matrix(pts), labels, 5), 1.0);
}

TEST(Reclassify, RandomLabelsAreChance) {
    Rng rng(2);
    const std::size_t m = 2000;
    Matrix pts(m, 2);
    std::vector<Label> labels(m);
    for (std::size_t i = 0; i < m; ++i) {
        labels[i] = i % 2;
        pts(i, 0) = rng.normal();
        pts(i, 1) = rng.normal();
    }
    rng.shuffle(std::span(labels));
    EXPECT_NEAR(reclassify_by_matrix(euclidean_distance_matrix(pts), labels, 5), 0.5, 0.05);
}

TEST(Reclassify, TiesGoToSmallerIndexAndLabel) {
    // Point 0 is equidistant from 1 (label 1) and 2 (label 0); k=1 picks index 1.
    Matrix d(4, 4, 1.0);
    for (std::size_t i = 0; i < 4; ++i) d(i, i) = 0.0;
    const std::vector<Label> labels{1, 1, 0, 0};
    // Everyone's nearest is the smallest other index: 0->1, 1->0, 2->0, 3->0.
    EXPECT_EQ(reclassify_by_matrix(d, labels, 1), 0.5);
    // k=2 on a 2-2 vote split goes to label 0: 0->{1,2} tie->0 wrong, 1->{0,2} ->0 wrong,
    // 2->{0,1} -> 1 wrong, 3->{0,1} -> 1 wrong.
    EXPECT_EQ(reclassify_by_matrix(d, labels, 2), 0.0);
}

TEST(Reclassify, Rejections) {
    Matrix d(3, 3, 0.0);
    const std::vector<Label> labels{0, 1, 0};
    EXPECT_THROW(reclassify_by_matrix(d, labels, 3), Error);
    EXPECT_THROW(reclassify_by_matrix(d, labels, 0), Error);
    EXPECT_THROW(reclassify_by_matrix(Matrix(3, 2, 0.0), labels, 1), Error);
    EXPECT_THROW(reclassify_by_matrix(d, std::vector<Label>{0, 1}, 1), Error);
}

TEST(DistanceMatrix, WritersProduceParsableText) {
    Matrix d(2, 2, 0.0);
    d(0, 1) = 0.5;
    d(1, 0) = 1e-20;
    std::ostringstream m, l;
    write_matrix(m, d);
    write_labels(l, std::vector<Label>{1, 0});
    EXPECT_EQ(m.str(), "0,0.5\n1e-20,0\n");
    EXPECT_EQ(l.str(), "1\n0\n");
}

}  // namespace
}  // namespace lann
