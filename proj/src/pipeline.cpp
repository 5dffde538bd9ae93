#include "cvd/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cvd/errors.hpp"

namespace cvd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::size_t> all_feature_indices(std::size_t d) {
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

std::vector<std::size_t> rfe_counts_or_default(const RunConfig& config, std::size_t d) {
    if (!config.rfe_counts.empty()) return config.rfe_counts;
    std::vector<std::size_t> counts(d);
    std::iota(counts.begin(), counts.end(), std::size_t{1});
    return counts;
}

} // namespace

std::string roc_csv_name(const std::string& algorithm) {
    std::string name = "roc_";
    for (char c : algorithm) {
        if (c == '-' || c == ' ')
            name += '_';
        else
            name += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return name + ".csv";
}

FittedComparison fit_comparison(const Dataset& raw, const RunConfig& config) {
    FittedComparison fitted;
    fitted.split = train_test_split(raw.n_rows(), config.train_fraction, config.seed,
                                    config.stratified ? &raw.labels : nullptr);
    fitted.scaling = fit_scaling(raw, fitted.split.train);
    const Dataset scaled = apply_scaling(raw, fitted.scaling);
    const Dataset train = select_rows(scaled, fitted.split.train);
    const std::size_t d = train.n_features();

    fitted.fit_seconds.assign(kAlgorithmOrder.size(), 0.0);
    const std::vector<std::size_t> baseline_features =
        all_feature_indices(d); // replaced below when the sensitivity flag is on

    // RFE-GB: cross-validated feature-count selection, then the boosted model
    // on the surviving features.
    auto start = Clock::now();
    fitted.rfe = rfecv(train, make_rank_config(config), config.rfe_kfold_k,
                       rfe_counts_or_default(config, d), config.seed);
    fitted.selected_feature_indices.assign(
        fitted.rfe.ranking.end() - static_cast<std::ptrdiff_t>(fitted.rfe.selected_count),
        fitted.rfe.ranking.end());
    std::sort(fitted.selected_feature_indices.begin(), fitted.selected_feature_indices.end());
    GbmConfig gbm_config = config.gbm;
    gbm_config.seed = config.seed;
    fitted.gbm = fit_gbm(select_features(train, fitted.selected_feature_indices), gbm_config);
    fitted.fit_seconds[4] = seconds_since(start);

    fitted.baseline_feature_indices =
        config.baselines_use_selected ? fitted.selected_feature_indices : baseline_features;
    const Dataset baseline_train = select_features(train, fitted.baseline_feature_indices);

    start = Clock::now();
    fitted.lda = fit_lda(baseline_train, config.lda_shrinkage);
    fitted.fit_seconds[0] = seconds_since(start);

    start = Clock::now();
    fitted.knn = fit_knn(baseline_train, config.knn_k);
    fitted.fit_seconds[1] = seconds_since(start);

    start = Clock::now();
    fitted.dt = fit_classification_tree(baseline_train.features, baseline_train.labels,
                                        config.gbm.tree);
    fitted.fit_seconds[2] = seconds_since(start);

    start = Clock::now();
    fitted.gnb = fit_gnb(baseline_train);
    fitted.fit_seconds[3] = seconds_since(start);
    return fitted;
}

CompareOutput evaluate_comparison(const FittedComparison& fitted, const Dataset& raw,
                                  const RunConfig& config) {
    const Dataset scaled = apply_scaling(raw, fitted.scaling);
    const Dataset test = select_rows(scaled, fitted.split.test);
    const Matrix baseline_x = test.features.select_cols(fitted.baseline_feature_indices);
    const Matrix gbm_x = test.features.select_cols(fitted.selected_feature_indices);
    const std::string echo = config_echo(config);
    const bool brier = config.mse_mode == MseMode::kProbability;

    CompareOutput out;
    out.rfe = fitted.rfe;
    out.rfe_criterion = config.rfe_criterion;
    out.feature_names = raw.feature_names;
    out.n_rows = raw.n_rows();
    out.n_train = fitted.split.train.size();
    out.n_test = fitted.split.test.size();
    out.seed = config.seed;
    out.config_text = echo;
    std::size_t positives = 0;
    for (int y : raw.labels) positives += static_cast<std::size_t>(y);
    out.class1_fraction = static_cast<double>(positives) / static_cast<double>(raw.n_rows());

    out.results.resize(kAlgorithmOrder.size());
    for (std::size_t a = 0; a < kAlgorithmOrder.size(); ++a) {
        const std::string& name = kAlgorithmOrder[a];
        const auto start = Clock::now();
        std::vector<double> proba;
        std::vector<int> labels;
        if (name == "LDA") {
            const BaselinePrediction pred = predict_lda(fitted.lda, baseline_x);
            proba.resize(pred.scores.size());
            for (std::size_t i = 0; i < pred.scores.size(); ++i)
                proba[i] = sigmoid(pred.scores[i]); // posterior from log-odds score
            labels = pred.labels;
        } else if (name == "KNN") {
            const BaselinePrediction pred = predict_knn(fitted.knn, baseline_x);
            proba = pred.scores;
            labels = pred.labels;
        } else if (name == "DT") {
            proba = predict_tree_rows(fitted.dt, baseline_x);
            labels.resize(proba.size());
            for (std::size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= 0.5 ? 1 : 0;
        } else if (name == "NB") {
            const BaselinePrediction pred = predict_gnb(fitted.gnb, baseline_x);
            proba.resize(pred.scores.size());
            for (std::size_t i = 0; i < pred.scores.size(); ++i)
                proba[i] = sigmoid(pred.scores[i]);
            labels = pred.labels;
        } else { // RFE-GB
            proba = predict_proba(fitted.gbm, gbm_x);
            labels = predict_label(fitted.gbm, gbm_x, config.label_threshold);
        }
        out.results[a].report =
            evaluate_classifier(name, test.labels, proba, labels, config.seed, echo, brier);
        out.results[a].wall_seconds = fitted.fit_seconds[a] + seconds_since(start);
    }
    return out;
}

CompareOutput run_comparison(const Dataset& raw, const RunConfig& config) {
    const FittedComparison fitted = fit_comparison(raw, config);
    return evaluate_comparison(fitted, raw, config);
}

nlohmann::json compare_report_json(const CompareOutput& output) {
    nlohmann::json doc;
    doc["version"] = kToolVersion;
    doc["dataset"] = {{"rows", output.n_rows},
                      {"train_rows", output.n_train},
                      {"test_rows", output.n_test},
                      {"class1_fraction", output.class1_fraction},
                      {"features", output.feature_names}};
    doc["config"] = output.config_text;
    doc["seed"] = output.seed;

    nlohmann::json results = nlohmann::json::array();
    for (const AlgorithmResult& result : output.results) {
        const EvalReport& r = result.report;
        nlohmann::json entry;
        entry["algorithm"] = r.algorithm_name;
        entry["accuracy"] = r.accuracy;
        entry["precision"] = r.precision;
        entry["recall"] = r.recall;
        entry["f1"] = r.f1;
        entry["kappa"] = r.kappa;
        entry["mse"] = r.mse;
        entry["rmse"] = r.rmse;
        entry["auc"] = r.auc;
        entry["confusion"] = {{"tn", r.confusion.tn},
                              {"fp", r.confusion.fp},
                              {"fn", r.confusion.fn},
                              {"tp", r.confusion.tp}};
        entry["confusion_row_normalized"] = {
            {r.confusion_row_normalized[0][0], r.confusion_row_normalized[0][1]},
            {r.confusion_row_normalized[1][0], r.confusion_row_normalized[1][1]}};
        // Full curves live in the per-algorithm CSVs next to the report.
        entry["roc"] = {{"auc", r.auc},
                        {"n_points", r.roc.points.size()},
                        {"csv", roc_csv_name(r.algorithm_name)}};
        entry["seed"] = r.seed;
        results.push_back(std::move(entry));
    }
    doc["results"] = std::move(results);
    doc["rfe"] = rfe_result_to_json(output.rfe, output.feature_names, output.rfe_criterion);

    nlohmann::json timings = nlohmann::json::object();
    for (std::size_t a = 0; a < output.results.size(); ++a)
        timings[output.results[a].report.algorithm_name] = output.results[a].wall_seconds;
    doc["timings"] = std::move(timings);
    return doc;
}

std::string compare_table_text(const CompareOutput& output) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "Algorithm";
    for (const char* col : {"Accuracy", "Precision", "Recall", "F1", "Kappa", "MSE", "RMSE", "AUC"})
        out << std::right << std::setw(11) << col;
    out << '\n';
    out << std::fixed << std::setprecision(4);
    for (const AlgorithmResult& result : output.results) {
        const EvalReport& r = result.report;
        out << std::left << std::setw(10) << r.algorithm_name << std::right << std::setw(11)
            << r.accuracy << std::setw(11) << r.precision << std::setw(11) << r.recall
            << std::setw(11) << r.f1 << std::setw(11) << r.kappa << std::setw(11) << r.mse
            << std::setw(11) << r.rmse << std::setw(11) << r.auc << '\n';
    }
    return out.str();
}

} // namespace cvd
