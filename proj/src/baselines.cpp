#include "cvd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvd/errors.hpp"
#include "cvd/parallel.hpp"

namespace cvd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct ClassView {
    std::vector<std::size_t> rows0, rows1;
};

ClassView split_classes(const Dataset& train) {
    ClassView view;
    for (std::size_t r = 0; r < train.n_rows(); ++r)
        (train.labels[r] == 0 ? view.rows0 : view.rows1).push_back(r);
    if (view.rows0.empty() || view.rows1.empty())
        throw TrainingError("baseline fit: both classes must be present");
    return view;
}

std::vector<double> class_mean(const Dataset& ds, const std::vector<std::size_t>& rows) {
    std::vector<double> mean(ds.n_features(), 0.0);
    for (std::size_t r : rows)
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += ds.features(r, j);
    for (double& m : mean) m /= static_cast<double>(rows.size());
    return mean;
}

// Cholesky factorization of a symmetric positive definite matrix; throws when
// the matrix is not PD.
Matrix cholesky(const Matrix& a) {
    const std::size_t d = a.rows();
    Matrix l(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            if (i == j) {
                if (sum <= 0.0)
                    throw TrainingError("fit_lda: covariance not invertible after regularization");
                l(i, j) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return l;
}

Matrix cholesky_inverse(const Matrix& a) {
    const std::size_t d = a.rows();
    const Matrix l = cholesky(a);
    // Solve L L^T X = I column by column.
    Matrix inv(d, d, 0.0);
    std::vector<double> y(d);
    for (std::size_t col = 0; col < d; ++col) {
        for (std::size_t i = 0; i < d; ++i) {
            double sum = i == col ? 1.0 : 0.0;
            for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
            y[i] = sum / l(i, i);
        }
        for (std::size_t i = d; i-- > 0;) {
            double sum = y[i];
            for (std::size_t k = i + 1; k < d; ++k) sum -= l(k, i) * inv(k, col);
            inv(i, col) = sum / l(i, i);
        }
    }
    // Symmetrize against round-off drift.
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (inv(i, j) + inv(j, i));
            inv(i, j) = v;
            inv(j, i) = v;
        }
    return inv;
}

double quad_form(const Matrix& m, std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < b.size(); ++j) row += m(i, j) * b[j];
        sum += a[i] * row;
    }
    return sum;
}

} // namespace

LdaModel fit_lda(const Dataset& train, double shrinkage) {
    if (shrinkage < 0.0) throw ValidationError("fit_lda: shrinkage must be >= 0");
    const ClassView view = split_classes(train);
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_features();
    if (n <= d) throw TrainingError("fit_lda: need more rows than features");

    LdaModel model;
    model.mean0 = class_mean(train, view.rows0);
    model.mean1 = class_mean(train, view.rows1);
    model.log_prior0 = std::log(static_cast<double>(view.rows0.size()) / static_cast<double>(n));
    model.log_prior1 = std::log(static_cast<double>(view.rows1.size()) / static_cast<double>(n));

    // Pooled within-class covariance: (S0*(n0-1) + S1*(n1-1)) / (n-2), where
    // S_c is the unbiased per-class covariance. Equivalent to summing centered
    // outer products and dividing once by n-2.
    Matrix cov(d, d, 0.0);
    auto accumulate = [&](const std::vector<std::size_t>& rows, const std::vector<double>& mean) {
        for (std::size_t r : rows)
            for (std::size_t i = 0; i < d; ++i) {
                const double di = train.features(r, i) - mean[i];
                for (std::size_t j = 0; j <= i; ++j)
                    cov(i, j) += di * (train.features(r, j) - mean[j]);
            }
    };
    accumulate(view.rows0, model.mean0);
    accumulate(view.rows1, model.mean1);
    const double denom = n > 2 ? static_cast<double>(n - 2) : 1.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            cov(i, j) /= denom;
            cov(j, i) = cov(i, j);
        }

    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += cov(i, i);
    const double ridge = shrinkage * trace / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) cov(i, i) += ridge;

    model.pooled_covariance_inverse = cholesky_inverse(cov);
    return model;
}

double score_lda(const LdaModel& model, std::span<const double> row) {
    if (row.size() != model.mean0.size()) throw ValidationError("score_lda: width mismatch");
    const Matrix& inv = model.pooled_covariance_inverse;
    const double d1 = quad_form(inv, row, model.mean1) -
                      0.5 * quad_form(inv, model.mean1, model.mean1) + model.log_prior1;
    const double d0 = quad_form(inv, row, model.mean0) -
                      0.5 * quad_form(inv, model.mean0, model.mean0) + model.log_prior0;
    return d1 - d0;
}

BaselinePrediction predict_lda(const LdaModel& model, const Matrix& rows) {
    BaselinePrediction out;
    out.scores.resize(rows.rows());
    out.labels.resize(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        out.scores[r] = score_lda(model, rows.row(r));
        out.labels[r] = out.scores[r] > 0.0 ? 1 : 0;
    }
    return out;
}

GnbModel fit_gnb(const Dataset& train) {
    const ClassView view = split_classes(train);
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_features();

    GnbModel model;
    model.mean0 = class_mean(train, view.rows0);
    model.mean1 = class_mean(train, view.rows1);
    model.log_prior0 = std::log(static_cast<double>(view.rows0.size()) / static_cast<double>(n));
    model.log_prior1 = std::log(static_cast<double>(view.rows1.size()) / static_cast<double>(n));

    auto variances = [&](const std::vector<std::size_t>& rows, const std::vector<double>& mean) {
        std::vector<double> var(d, 0.0);
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = train.features(r, j) - mean[j];
                var[j] += diff * diff;
            }
        for (double& v : var) v /= static_cast<double>(rows.size());
        return var;
    };
    model.var0 = variances(view.rows0, model.mean0);
    model.var1 = variances(view.rows1, model.mean1);

    // Floor: 1e-9 times the largest overall feature variance, so constant
    // columns cannot divide by zero.
    std::vector<double> global_mean(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < d; ++j) global_mean[j] += train.features(r, j);
    for (double& m : global_mean) m /= static_cast<double>(n);
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double v = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double diff = train.features(r, j) - global_mean[j];
            v += diff * diff;
        }
        max_var = std::max(max_var, v / static_cast<double>(n));
    }
    double floor = 1e-9 * max_var;
    if (floor <= 0.0) floor = 1e-9;
    for (double& v : model.var0) v = std::max(v, floor);
    for (double& v : model.var1) v = std::max(v, floor);
    return model;
}

BaselinePrediction predict_gnb(const GnbModel& model, const Matrix& rows) {
    if (rows.cols() != model.mean0.size()) throw ValidationError("predict_gnb: width mismatch");
    BaselinePrediction out;
    out.scores.resize(rows.rows());
    out.labels.resize(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        double ll0 = model.log_prior0, ll1 = model.log_prior1;
        for (std::size_t j = 0; j < rows.cols(); ++j) {
            const double x = rows(r, j);
            const double z0 = x - model.mean0[j];
            const double z1 = x - model.mean1[j];
            ll0 -= 0.5 * (std::log(kTwoPi * model.var0[j]) + z0 * z0 / model.var0[j]);
            ll1 -= 0.5 * (std::log(kTwoPi * model.var1[j]) + z1 * z1 / model.var1[j]);
        }
        out.scores[r] = ll1 - ll0;
        out.labels[r] = out.scores[r] > 0.0 ? 1 : 0;
    }
    return out;
}

BaselinePrediction fit_predict_gnb(const Dataset& train, const Matrix& rows) {
    return predict_gnb(fit_gnb(train), rows);
}

KnnModel fit_knn(const Dataset& train, std::size_t k) {
    if (k < 1 || k > train.n_rows()) throw ValidationError("fit_knn: k outside [1, n_train]");
    return KnnModel{train.features, train.labels, k};
}

BaselinePrediction predict_knn(const KnnModel& model, const Matrix& rows) {
    if (rows.cols() != model.train_features.cols())
        throw ValidationError("predict_knn: width mismatch");
    const std::size_t n_train = model.train_features.rows();
    const std::size_t k = model.k;
    BaselinePrediction out;
    out.scores.resize(rows.rows());
    out.labels.resize(rows.rows());

    parallel_for(rows.rows(), [&](std::size_t r) {
        const auto query = rows.row(r);
        // k smallest (distance, index) pairs; the lexicographic order makes
        // distance ties resolve toward the lower training-row index.
        std::vector<std::pair<double, std::size_t>> heap; // max-heap of kept k
        heap.reserve(k + 1);
        for (std::size_t t = 0; t < n_train; ++t) {
            double dist = 0.0;
            for (std::size_t j = 0; j < rows.cols(); ++j) {
                const double diff = query[j] - model.train_features(t, j);
                dist += diff * diff;
            }
            const std::pair<double, std::size_t> cand{dist, t};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end());
            } else if (cand < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        std::sort_heap(heap.begin(), heap.end()); // ascending (distance, index)
        std::size_t votes1 = 0;
        for (const auto& [dist, t] : heap) votes1 += static_cast<std::size_t>(model.train_labels[t]);
        out.scores[r] = static_cast<double>(votes1) / static_cast<double>(k);
        if (2 * votes1 > k)
            out.labels[r] = 1;
        else if (2 * votes1 < k)
            out.labels[r] = 0;
        else
            out.labels[r] = model.train_labels[heap.front().second]; // exact tie
    }, 64);
    return out;
}

BaselinePrediction fit_predict_dt(const Dataset& train, const Matrix& rows,
                                  const TreeConfig& config) {
    const Tree tree = fit_classification_tree(train.features, train.labels, config);
    BaselinePrediction out;
    out.scores = predict_tree_rows(tree, rows);
    out.labels.resize(out.scores.size());
    for (std::size_t i = 0; i < out.scores.size(); ++i)
        out.labels[i] = out.scores[i] >= 0.5 ? 1 : 0;
    return out;
}

} // namespace cvd
