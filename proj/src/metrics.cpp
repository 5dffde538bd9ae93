#include "cvd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "cvd/errors.hpp"

namespace cvd {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw ValidationError("confusion: length mismatch");
    if (y_true.empty()) throw ValidationError("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if ((t != 0 && t != 1) || (p != 0 && p != 1))
            throw ValidationError("confusion: non-binary value");
        if (t == 0)
            p == 0 ? ++cm.tn : ++cm.fp;
        else
            p == 0 ? ++cm.fn : ++cm.tp;
    }
    return cm;
}

ClassificationRates classification_rates(const ConfusionMatrix& cm) {
    const double n = static_cast<double>(cm.total());
    if (n == 0.0) throw ValidationError("classification_rates: empty matrix");
    ClassificationRates r;
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / n;
    const double pp = static_cast<double>(cm.tp + cm.fp);
    const double ap = static_cast<double>(cm.tp + cm.fn);
    r.precision = pp == 0.0 ? 0.0 : static_cast<double>(cm.tp) / pp;
    r.recall = ap == 0.0 ? 0.0 : static_cast<double>(cm.tp) / ap;
    r.f1 = (r.precision + r.recall) == 0.0
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

double cohens_kappa(const ConfusionMatrix& cm) {
    const double n = static_cast<double>(cm.total());
    if (n == 0.0) throw ValidationError("cohens_kappa: empty matrix");
    const double p_o = static_cast<double>(cm.tp + cm.tn) / n;
    const double p_e = (static_cast<double>(cm.tn + cm.fp) * static_cast<double>(cm.tn + cm.fn) +
                        static_cast<double>(cm.fn + cm.tp) * static_cast<double>(cm.fp + cm.tp)) /
                       (n * n);
    if (p_e == 1.0) return 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

double mse(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size()) throw ValidationError("mse: length mismatch");
    if (y_true.empty()) throw ValidationError("mse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double d = y_true[i] - y_pred[i];
        sum += d * d;
    }
    return sum / static_cast<double>(y_true.size());
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
    return std::sqrt(mse(y_true, y_pred));
}

RocCurve roc_auc(std::span<const int> y_true, std::span<const double> scores) {
    if (y_true.size() != scores.size()) throw ValidationError("roc_auc: length mismatch");
    std::uint64_t n_pos = 0, n_neg = 0;
    for (int t : y_true) {
        if (t != 0 && t != 1) throw ValidationError("roc_auc: non-binary label");
        t == 1 ? ++n_pos : ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) throw ValidationError("AUC undefined: single-class labels");

    std::vector<std::size_t> order(y_true.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double inf = std::numeric_limits<double>::infinity();
    RocCurve curve;
    curve.points.push_back({0.0, 0.0, inf});
    std::uint64_t tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0, area = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        // Consume the whole tied-score group: one curve point per threshold.
        while (i < order.size() && scores[order[i]] == s) {
            y_true[order[i]] == 1 ? ++tp : ++fp;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        area += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        curve.points.push_back({fpr, tpr, s});
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.points.push_back({1.0, 1.0, -inf});
    curve.auc = area;
    return curve;
}

void write_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points) {
        if (std::isinf(p.threshold))
            out << (p.threshold > 0 ? "inf" : "-inf");
        else
            out << p.threshold;
        out << ',' << p.fpr << ',' << p.tpr << '\n';
    }
    if (!out) throw ValidationError("write failed: " + path);
}

EvalReport evaluate_classifier(const std::string& algorithm_name, std::span<const int> y_true,
                               std::span<const double> probabilities,
                               std::span<const int> predicted_labels, std::uint64_t seed,
                               const std::string& config_echo, bool mse_on_probabilities) {
    EvalReport report;
    report.algorithm_name = algorithm_name;
    report.seed = seed;
    report.config_echo = config_echo;
    report.confusion = confusion(y_true, predicted_labels);
    const ClassificationRates rates = classification_rates(report.confusion);
    report.accuracy = rates.accuracy;
    report.precision = rates.precision;
    report.recall = rates.recall;
    report.f1 = rates.f1;
    report.kappa = cohens_kappa(report.confusion);

    std::vector<double> truth(y_true.size());
    for (std::size_t i = 0; i < y_true.size(); ++i) truth[i] = y_true[i];
    std::vector<double> predicted(y_true.size());
    if (mse_on_probabilities) {
        predicted.assign(probabilities.begin(), probabilities.end());
    } else {
        for (std::size_t i = 0; i < predicted_labels.size(); ++i)
            predicted[i] = predicted_labels[i];
    }
    report.mse = mse(truth, predicted);
    report.rmse = std::sqrt(report.mse);

    report.roc = roc_auc(y_true, probabilities);
    report.auc = report.roc.auc;

    const auto& cm = report.confusion;
    const double row0 = static_cast<double>(cm.tn + cm.fp);
    const double row1 = static_cast<double>(cm.fn + cm.tp);
    report.confusion_row_normalized[0][0] = row0 == 0.0 ? 0.0 : cm.tn / row0;
    report.confusion_row_normalized[0][1] = row0 == 0.0 ? 0.0 : cm.fp / row0;
    report.confusion_row_normalized[1][0] = row1 == 0.0 ? 0.0 : cm.fn / row1;
    report.confusion_row_normalized[1][1] = row1 == 0.0 ? 0.0 : cm.tp / row1;
    return report;
}

} // namespace cvd
