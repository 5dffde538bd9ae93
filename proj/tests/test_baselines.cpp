#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cvd/baselines.hpp"
#include "cvd/errors.hpp"
#include "cvd/rng.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace cvd;

namespace {

// Two classes with means (-1,0) and (1,0) and identity pooled covariance:
// offsets of sqrt(6)/2 along each axis make the pooled estimate exactly I.
Dataset identity_cov_classes() {
    const double s = std::sqrt(6.0) / 2.0;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int cls : {0, 1}) {
        const double cx = cls == 0 ? -1.0 : 1.0;
        for (const auto& [dx, dy] :
             std::vector<std::pair<double, double>>{{s, 0}, {-s, 0}, {0, s}, {0, -s}}) {
            rows.push_back({cx + dx, dy});
            labels.push_back(cls);
        }
    }
    return synth::make_dataset(rows, labels);
}

oracles::TwoClassData to_oracle(const Dataset& ds) {
    oracles::TwoClassData data;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        std::vector<double> row;
        for (std::size_t j = 0; j < ds.n_features(); ++j) row.push_back(ds.features(r, j));
        data.x.push_back(row);
        data.y.push_back(ds.labels[r]);
    }
    return data;
}

Dataset random_two_class(std::size_t n, std::size_t d, Rng& rng) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(d);
        for (double& v : row) v = rng.next_normal();
        rows.push_back(row);
        labels.push_back(static_cast<int>(rng.bounded(2)));
    }
    labels[0] = 0;
    labels[1] = 1;
    return synth::make_dataset(rows, labels);
}

} // namespace

TEST_CASE("lda recovers the closed-form discriminant") {
    const Dataset ds = identity_cov_classes();
    const LdaModel model = fit_lda(ds, 0.0);
    // w = Sigma^-1 (mu1 - mu0) = (2, 0).
    const double w0 = model.pooled_covariance_inverse(0, 0) * 2.0;
    CHECK(w0 == doctest::Approx(2.0));
    CHECK(model.pooled_covariance_inverse(0, 1) == doctest::Approx(0.0));

    CHECK(score_lda(model, std::vector<double>{0.5, 0.0}) > 0.0);
    const BaselinePrediction pred = predict_lda(model, Matrix::from_rows({{0.5, 0.0}}));
    CHECK(pred.labels[0] == 1);

    // The midpoint of the means scores zero and ties to class 0.
    CHECK(score_lda(model, std::vector<double>{0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(predict_lda(model, Matrix::from_rows({{0.0, 0.0}})).labels[0] == 0);

    // A row at mu1 scores positive.
    CHECK(score_lda(model, std::vector<double>{1.0, 0.0}) > 0.0);
}

TEST_CASE("lda with identical class means ties to class 0") {
    std::vector<std::vector<double>> rows = {{0, 1}, {0, -1}, {1, 0}, {-1, 0},
                                             {0, 2}, {0, -2}, {2, 0}, {-2, 0}};
    const std::vector<int> labels = {0, 0, 0, 0, 1, 1, 1, 1};
    const Dataset ds = synth::make_dataset(rows, labels);
    const LdaModel model = fit_lda(ds, 1e-4);
    const BaselinePrediction pred = predict_lda(model, Matrix::from_rows({{0.3, 0.4}}));
    CHECK(pred.labels[0] == 0);
}

TEST_CASE("lda prior term shifts the score by the log prior ratio") {
    LdaModel model;
    model.mean0 = {-1.0};
    model.mean1 = {1.0};
    model.pooled_covariance_inverse = Matrix::from_rows({{1.0}});
    model.log_prior0 = std::log(0.5);
    model.log_prior1 = std::log(0.5);
    const double balanced = score_lda(model, std::vector<double>{0.2});
    model.log_prior1 = std::log(2.0 / 3.0);
    model.log_prior0 = std::log(1.0 / 3.0);
    const double doubled = score_lda(model, std::vector<double>{0.2});
    CHECK(doubled - balanced == doctest::Approx(std::log(2.0)));
}

TEST_CASE("lda error paths") {
    const Dataset one_class = synth::make_dataset({{1, 2}, {3, 4}, {5, 6}}, {1, 1, 1});
    CHECK_THROWS_AS(fit_lda(one_class, 1e-4), TrainingError);
    const Dataset tiny = synth::make_dataset({{1, 2}, {3, 4}}, {0, 1});
    CHECK_THROWS_AS(fit_lda(tiny, 1e-4), TrainingError); // n <= d
    const LdaModel model = fit_lda(identity_cov_classes(), 0.0);
    CHECK_THROWS_AS(score_lda(model, std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("gnb separates distant 1-D classes") {
    const Dataset ds =
        synth::make_dataset({{-1}, {0}, {1}, {9}, {10}, {11}}, {0, 0, 0, 1, 1, 1});
    const BaselinePrediction pred = fit_predict_gnb(ds, Matrix::from_rows({{9.5}, {0.2}}));
    CHECK(pred.labels[0] == 1);
    CHECK(pred.labels[1] == 0);
}

TEST_CASE("gnb symmetric problem scores zero and ties to class 0") {
    const Dataset ds = synth::make_dataset({{-2}, {-1}, {1}, {2}}, {0, 0, 1, 1});
    const BaselinePrediction pred = fit_predict_gnb(ds, Matrix::from_rows({{0.0}}));
    CHECK(pred.scores[0] == doctest::Approx(0.0));
    CHECK(pred.labels[0] == 0);
}

TEST_CASE("gnb floors zero variances") {
    const Dataset ds = synth::make_dataset({{1, 5}, {2, 5}, {3, 5}, {4, 5}}, {0, 0, 1, 1});
    const BaselinePrediction pred = fit_predict_gnb(ds, Matrix::from_rows({{2.5, 5.0}}));
    CHECK(std::isfinite(pred.scores[0]));
}

TEST_CASE("gnb and lda scores flip sign under label swap") {
    Rng rng(8);
    const Dataset ds = random_two_class(40, 2, rng);
    Dataset swapped = ds;
    for (int& y : swapped.labels) y = 1 - y;
    const Matrix queries = Matrix::from_rows({{0.1, -0.2}, {1.0, 0.5}});

    const BaselinePrediction gnb_a = fit_predict_gnb(ds, queries);
    const BaselinePrediction gnb_b = fit_predict_gnb(swapped, queries);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(gnb_a.scores[i] == doctest::Approx(-gnb_b.scores[i]).epsilon(1e-9));

    const BaselinePrediction lda_a = predict_lda(fit_lda(ds, 1e-4), queries);
    const BaselinePrediction lda_b = predict_lda(fit_lda(swapped, 1e-4), queries);
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(lda_a.scores[i] == doctest::Approx(-lda_b.scores[i]).epsilon(1e-9));
}

TEST_CASE("knn basics and tie rules") {
    const Dataset ds = synth::make_dataset({{0}, {1}, {2}, {10}}, {1, 0, 0, 1});
    // k=1, query identical to a training row.
    const KnnModel k1 = fit_knn(ds, 1);
    CHECK(predict_knn(k1, Matrix::from_rows({{10.0}})).labels[0] == 1);
    CHECK(predict_knn(k1, Matrix::from_rows({{1.0}})).labels[0] == 0);

    // k=3 around x=1: neighbours {1,0,2} have labels {0,1,0} -> score 1/3.
    const KnnModel k3 = fit_knn(ds, 3);
    const BaselinePrediction pred = predict_knn(k3, Matrix::from_rows({{1.1}}));
    CHECK(pred.scores[0] == doctest::Approx(1.0 / 3.0));
    CHECK(pred.labels[0] == 0);

    // k=2 exact vote tie resolves to the nearest neighbour's label.
    const Dataset pair = synth::make_dataset({{0}, {3}}, {1, 0});
    const KnnModel k2 = fit_knn(pair, 2);
    CHECK(predict_knn(k2, Matrix::from_rows({{1.0}})).labels[0] == 1);
    CHECK(predict_knn(k2, Matrix::from_rows({{2.5}})).labels[0] == 0);

    CHECK_THROWS_AS(fit_knn(ds, 0), ValidationError);
    CHECK_THROWS_AS(fit_knn(ds, 5), ValidationError);
    CHECK_THROWS_AS(predict_knn(k1, Matrix::from_rows({{1.0, 2.0}})), ValidationError);
}

TEST_CASE("knn distance ties prefer the lower training index") {
    // Rows 0 and 1 are equidistant from the query; row 0 must win.
    const Dataset ds = synth::make_dataset({{1}, {-1}, {5}}, {1, 0, 0});
    const KnnModel model = fit_knn(ds, 1);
    CHECK(predict_knn(model, Matrix::from_rows({{0.0}})).labels[0] == 1);
}

TEST_CASE("knn with k equal to n predicts the majority class") {
    Rng rng(21);
    for (int it = 0; it < 10; ++it) {
        const std::size_t n = 5 + rng.bounded(10);
        const Dataset ds = random_two_class(n, 2, rng);
        std::size_t ones = 0;
        for (int y : ds.labels) ones += static_cast<std::size_t>(y);
        const KnnModel model = fit_knn(ds, n);
        const BaselinePrediction pred = predict_knn(model, Matrix::from_rows({{0.0, 0.0}}));
        if (2 * ones != n) {
            CHECK(pred.labels[0] == (2 * ones > n ? 1 : 0));
        }
    }
}

TEST_CASE("dt baseline behaviour") {
    const Dataset pure = synth::make_dataset({{1}, {2}, {3}}, {1, 1, 1});
    TreeConfig config{8, 2, 1};
    const BaselinePrediction all_one =
        fit_predict_dt(pure, Matrix::from_rows({{0.0}, {9.0}}), config);
    CHECK(all_one.scores == std::vector<double>{1.0, 1.0});

    const Dataset step = synth::make_dataset({{0}, {0}, {1}, {1}}, {0, 0, 1, 1});
    const BaselinePrediction routed =
        fit_predict_dt(step, Matrix::from_rows({{0.2}, {0.9}}), config);
    CHECK(routed.scores[0] == doctest::Approx(0.0));
    CHECK(routed.scores[1] == doctest::Approx(1.0));

    // Leaf fraction exactly one half labels as class 1 (>= rule).
    const Dataset half = synth::make_dataset({{7}, {7}}, {0, 1});
    const BaselinePrediction tie = fit_predict_dt(half, Matrix::from_rows({{7.0}}), config);
    CHECK(tie.scores[0] == doctest::Approx(0.5));
    CHECK(tie.labels[0] == 1);
}

TEST_CASE("all four baselines separate an easy 2-D problem") {
    const Dataset ds = synth::separable_2d(200, 2.0, 13);
    auto accuracy = [&](const std::vector<int>& labels) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < labels.size(); ++i)
            correct += static_cast<std::size_t>(labels[i] == ds.labels[i]);
        return static_cast<double>(correct) / static_cast<double>(labels.size());
    };
    CHECK(accuracy(predict_lda(fit_lda(ds, 1e-4), ds.features).labels) >= 0.99);
    CHECK(accuracy(predict_knn(fit_knn(ds, 5), ds.features).labels) >= 0.99);
    CHECK(accuracy(fit_predict_gnb(ds, ds.features).labels) >= 0.99);
    TreeConfig config{6, 2, 1};
    CHECK(accuracy(fit_predict_dt(ds, ds.features, config).labels) >= 0.99);
}

TEST_CASE("baseline predictions match the brute-force oracles") {
    Rng rng(2025);
    for (int it = 0; it < 150; ++it) {
        const std::size_t d = 1 + rng.bounded(2);
        const std::size_t n = d + 2 + rng.bounded(12 - d - 1); // keep n > d for LDA
        const Dataset ds = random_two_class(n, d, rng);
        const oracles::TwoClassData data = to_oracle(ds);
        std::vector<double> query(d);
        for (double& v : query) v = rng.next_normal();
        const Matrix query_matrix = Matrix::from_rows({query});

        const double shrinkage = 1e-4;
        CHECK(predict_lda(fit_lda(ds, shrinkage), query_matrix).labels[0] ==
              oracles::oracle_lda_predict(data, shrinkage, query));
        CHECK(fit_predict_gnb(ds, query_matrix).labels[0] ==
              oracles::oracle_gnb_predict(data, query));
        const std::size_t k = 1 + rng.bounded(n);
        CHECK(predict_knn(fit_knn(ds, k), query_matrix).labels[0] ==
              oracles::oracle_knn_predict(data, k, query));
    }
}
