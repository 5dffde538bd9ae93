#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cvd {

// Rows are the true class (0 then 1), columns the predicted class.
struct ConfusionMatrix {
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tp = 0;

    std::uint64_t total() const { return tn + fp + fn + tp; }
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct ClassificationRates {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Zero-denominator cells (no predicted positives, no actual positives) yield 0.
ClassificationRates classification_rates(const ConfusionMatrix& cm);

// Chance-corrected agreement (p_o - p_e) / (1 - p_e); 0 when p_e == 1.
double cohens_kappa(const ConfusionMatrix& cm);

double mse(std::span<const double> y_true, std::span<const double> y_pred);
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // starts at (0,0), ends at (1,1)
    double auc = 0.0;
};

// One point per unique score (descending), decision rule `score >= threshold`,
// trapezoidal area. Tied scores form a single segment, so the area equals the
// Mann-Whitney statistic with ties counted one half.
RocCurve roc_auc(std::span<const int> y_true, std::span<const double> scores);

// CSV with header `threshold,fpr,tpr`; synthetic endpoints carry inf/-inf.
void write_roc_csv(const RocCurve& curve, const std::string& path);

// Every reported quantity for one (model, test set) pair.
struct EvalReport {
    std::string algorithm_name;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double kappa = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    double auc = 0.0;
    ConfusionMatrix confusion;
    std::array<std::array<double, 2>, 2> confusion_row_normalized{{{0.0, 0.0}, {0.0, 0.0}}};
    RocCurve roc;
    std::uint64_t seed = 0;
    std::string config_echo;
};

// Assembles a full report; `probabilities` drive the ROC and, when
// mse_on_probabilities is set, the Brier-style error columns.
EvalReport evaluate_classifier(const std::string& algorithm_name, std::span<const int> y_true,
                               std::span<const double> probabilities,
                               std::span<const int> predicted_labels, std::uint64_t seed,
                               const std::string& config_echo, bool mse_on_probabilities = false);

} // namespace cvd
