#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cvd/dataset.hpp"
#include "cvd/tree.hpp"

namespace cvd {

struct GbmConfig {
    std::size_t n_stages = 100;
    double learning_rate = 0.1;
    TreeConfig tree;
    std::uint64_t seed = 0; // echoed in reports; the fit itself is deterministic
};

struct GbmStage {
    Tree tree;
    double learning_rate = 0.0;
};

// Additive log-odds model: initial score plus shrinkage-scaled regression trees.
struct GbmModel {
    double initial_score = 0.0;
    std::vector<GbmStage> stages;
    std::size_t n_features = 0;
    std::vector<std::string> feature_names;
};

// Numerically stable logistic function.
double sigmoid(double score);

// Binomial-deviance boosting: trees fit to residuals y - sigmoid(F), leaf
// values replaced by one Newton step, F updated with shrinkage.
GbmModel fit_gbm(const Dataset& train, const GbmConfig& config);

std::vector<double> predict_score(const GbmModel& model, const Matrix& rows);
// Probabilities strictly inside (0,1).
std::vector<double> predict_proba(const GbmModel& model, const Matrix& rows);
std::vector<int> predict_label(const GbmModel& model, const Matrix& rows,
                               double threshold = 0.5);

// Mean log-loss after 0, 1, ..., n_stages stages.
std::vector<double> staged_train_loss(const GbmModel& model, const Dataset& train);

// Per-feature importances summed over stages, normalized to sum 1.
std::vector<double> gbm_importances(const GbmModel& model);

nlohmann::json gbm_to_json(const GbmModel& model);
GbmModel gbm_from_json(const nlohmann::json& doc);
void save_gbm(const GbmModel& model, const std::string& path);
GbmModel load_gbm(const std::string& path);

} // namespace cvd
