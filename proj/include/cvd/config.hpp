#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvd/dataset.hpp"
#include "cvd/gbm.hpp"
#include "cvd/selection.hpp"

namespace cvd {

enum class MseMode { kLabel, kProbability };

// Every knob of the pipeline. Each field has a documented default; unknown
// keys are rejected so configs cannot silently rot.
struct RunConfig {
    std::string input;
    std::string output_dir = "out";
    std::uint64_t seed = 42;

    double train_fraction = 0.7;
    bool stratified = true;
    std::size_t kfold_k = 10;

    char delimiter = ';';
    AgeUnit age_unit = AgeUnit::kAuto;
    bool filter_implausible_vitals = false;

    MseMode mse_mode = MseMode::kLabel;
    double label_threshold = 0.5;

    GbmConfig gbm; // gbm.tree carries the shared tree defaults
    std::size_t knn_k = 5;
    double lda_shrinkage = 1e-4;

    RankCriterion rfe_criterion = RankCriterion::kGbImportance;
    std::size_t rfe_step = 1;
    std::vector<std::size_t> rfe_counts; // empty = evaluate 1..n_features
    std::size_t rfe_kfold_k = 10;
    LinearFitConfig linear;

    bool baselines_use_selected = false;
    bool train_use_rfe = false;
};

// Parses `key = value` lines; `#` starts a comment. Dotted keys address nested
// settings (gbm.learning_rate, tree.max_depth, ...).
RunConfig parse_config_file(const std::string& path);

// Applies one key=value override; throws ValidationError on unknown keys or
// out-of-range values.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

// Validates cross-field constraints; called after parsing and overrides.
void validate_config(const RunConfig& config);

// Canonical echo of every setting, one `key = value` per line, sorted by key.
std::string config_echo(const RunConfig& config);

RankConfig make_rank_config(const RunConfig& config);

} // namespace cvd
