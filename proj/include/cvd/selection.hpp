#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cvd/dataset.hpp"
#include "cvd/gbm.hpp"

namespace cvd {

struct LinearFitConfig {
    double regularization = 1e-3; // L2 strength on the augmented (w, b) vector
    std::size_t epochs = 10;
    double step_scale = 1.0; // eta_t = step_scale / (regularization * t)
    std::uint64_t seed = 42;
};

// Linear decision function f(x) = w.x + b fit by seeded stochastic subgradient
// descent on L2-regularized hinge loss, labels mapped to {-1,+1}.
struct LinearMarginModel {
    std::vector<double> w;
    double b = 0.0;
    LinearFitConfig config;
};

LinearMarginModel fit_linear_margin_model(const Dataset& train, const LinearFitConfig& config);

// Ranking criterion per feature: w_k squared.
std::vector<double> weight_ranking(const LinearMarginModel& model);

enum class RankCriterion { kSquaredWeight, kGbImportance };

struct RankConfig {
    RankCriterion criterion = RankCriterion::kGbImportance;
    LinearFitConfig linear;
    GbmConfig gbm;
};

std::vector<double> rank_features(const Dataset& train, const RankConfig& config);

struct RfeResult {
    // Permutation of feature indices: eliminations in order, then survivors
    // ordered by their final-iteration criterion descending.
    std::vector<std::size_t> ranking;
    std::map<std::size_t, double> cv_scores; // feature count -> mean CV accuracy
    std::size_t selected_count = 0;
    std::vector<std::string> selected_features;
};

// Recursive elimination: refit the criterion on survivors, drop the `step`
// weakest each round (final round drops fewer when needed).
RfeResult rfe(const Dataset& train, const RankConfig& config, std::size_t step,
              std::size_t target_count);

// Cross-validated feature-count selection: per fold, eliminate step-1 down the
// candidate counts, score a GBM on the held-out part at each count; pick the
// count with the best mean accuracy (ties toward fewer features), then rerun
// the elimination on the full data at that count.
RfeResult rfecv(const Dataset& data, const RankConfig& config, std::size_t k,
                const std::vector<std::size_t>& counts_to_evaluate, std::uint64_t seed);

nlohmann::json rfe_result_to_json(const RfeResult& result,
                                  const std::vector<std::string>& feature_names,
                                  RankCriterion criterion);

// Two-column CSV (feature_count, cv_score) for plotting the selection curve.
void write_cv_curve_csv(const RfeResult& result, const std::string& path);

const char* criterion_name(RankCriterion criterion);

} // namespace cvd
