#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvd/dataset.hpp"
#include "cvd/matrix.hpp"
#include "cvd/tree.hpp"

namespace cvd {

// Shared output shape of the comparison classifiers: a continuous class-1
// score per row (for ROC) and a hard label. All tie rules resolve to class 0
// unless stated otherwise.
struct BaselinePrediction {
    std::vector<double> scores;
    std::vector<int> labels;
};

struct LdaModel {
    std::vector<double> mean0;
    std::vector<double> mean1;
    Matrix pooled_covariance_inverse;
    double log_prior0 = 0.0;
    double log_prior1 = 0.0;
};

// Pooled within-class covariance, regularized by shrinkage * trace/d on the
// diagonal, then inverted (Cholesky).
LdaModel fit_lda(const Dataset& train, double shrinkage = 1e-4);

// delta_1(x) - delta_0(x); label 1 iff score > 0.
double score_lda(const LdaModel& model, std::span<const double> row);
BaselinePrediction predict_lda(const LdaModel& model, const Matrix& rows);

struct GnbModel {
    std::vector<double> mean0, mean1;
    std::vector<double> var0, var1; // floored
    double log_prior0 = 0.0;
    double log_prior1 = 0.0;
};

GnbModel fit_gnb(const Dataset& train);
// Score is the log-posterior difference (class 1 minus class 0).
BaselinePrediction predict_gnb(const GnbModel& model, const Matrix& rows);
BaselinePrediction fit_predict_gnb(const Dataset& train, const Matrix& rows);

struct KnnModel {
    Matrix train_features;
    std::vector<int> train_labels;
    std::size_t k = 5;
};

KnnModel fit_knn(const Dataset& train, std::size_t k);

// Euclidean metric; distance ties break toward the lower training-row index,
// exact vote ties toward the single nearest neighbour's label. Score is the
// class-1 fraction among the k nearest.
BaselinePrediction predict_knn(const KnnModel& model, const Matrix& rows);

// Gini CART classifier; score is the leaf class-1 fraction, label 1 iff >= 0.5.
BaselinePrediction fit_predict_dt(const Dataset& train, const Matrix& rows,
                                  const TreeConfig& config);

} // namespace cvd
