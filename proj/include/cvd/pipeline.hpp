#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cvd/baselines.hpp"
#include "cvd/config.hpp"
#include "cvd/dataset.hpp"
#include "cvd/gbm.hpp"
#include "cvd/metrics.hpp"
#include "cvd/selection.hpp"

namespace cvd {

inline constexpr const char* kToolVersion = "1.0.0";

// Fixed comparison order: LDA, KNN, DT, NB, RFE-GB.
inline const std::vector<std::string> kAlgorithmOrder = {"LDA", "KNN", "DT", "NB", "RFE-GB"};

// Everything fitted by the comparison pipeline. Fitting sees only training
// rows: scaling parameters come from the train partition and every model is
// fit on the scaled train view, so test rows cannot influence any field here.
struct FittedComparison {
    SplitIndices split;
    ScalingParams scaling;
    RfeResult rfe;
    std::vector<std::size_t> selected_feature_indices; // ascending original ids
    std::vector<std::size_t> baseline_feature_indices;
    GbmModel gbm;
    LdaModel lda;
    GnbModel gnb;
    KnnModel knn;
    Tree dt;
    std::vector<double> fit_seconds; // kAlgorithmOrder order
};

FittedComparison fit_comparison(const Dataset& raw, const RunConfig& config);

struct AlgorithmResult {
    EvalReport report;
    double wall_seconds = 0.0;
};

struct CompareOutput {
    std::vector<AlgorithmResult> results; // kAlgorithmOrder order
    RfeResult rfe;
    RankCriterion rfe_criterion = RankCriterion::kGbImportance;
    std::vector<std::string> feature_names;
    std::size_t n_rows = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double class1_fraction = 0.0;
    std::string config_text;
    std::uint64_t seed = 0;
};

// Scores every fitted model on the held-out partition and assembles reports.
CompareOutput evaluate_comparison(const FittedComparison& fitted, const Dataset& raw,
                                  const RunConfig& config);

CompareOutput run_comparison(const Dataset& raw, const RunConfig& config);

// Report document: {version, dataset, config, results, rfe, timings}. The
// timings section is the only part that varies between identical runs.
nlohmann::json compare_report_json(const CompareOutput& output);

// Aligned text table in the fixed algorithm order.
std::string compare_table_text(const CompareOutput& output);

std::string roc_csv_name(const std::string& algorithm);

} // namespace cvd
