#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvd/matrix.hpp"

namespace cvd {

// Column-named numeric feature matrix with a binary label vector. Immutable
// after construction; the single currency of the pipeline.
struct Dataset {
    std::vector<std::string> feature_names;
    Matrix features;          // n_rows x n_features
    std::vector<int> labels;  // values in {0, 1}

    std::size_t n_rows() const { return features.rows(); }
    std::size_t n_features() const { return features.cols(); }
};

// Per-column (min, max) fitted on the training partition only.
struct ScalingParams {
    std::vector<double> min;
    std::vector<double> max;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<std::vector<std::size_t>> folds;
};

enum class AgeUnit { kDays, kYears, kAuto };

struct LoadOptions {
    char delimiter = ';';
    AgeUnit age_unit = AgeUnit::kAuto;
    bool filter_implausible_vitals = false; // opt-in; default keeps every row
};

struct LoadStats {
    std::size_t imputed_cells = 0;
    std::size_t filtered_rows = 0;
};

// Canonical feature order for the cardiovascular CSV schema.
inline constexpr std::array<const char*, 11> kCanonicalFeatures = {
    "age", "gender", "height", "weight", "ap_hi", "ap_lo",
    "cholesterol", "gluc", "smoke", "alco", "active"};
inline constexpr const char* kTargetColumn = "cardio";

// Loads the cardiovascular CSV: header matched by name (case-insensitive),
// `id` dropped, age converted to years per the age-unit policy, missing cells
// (empty or NA) imputed with the per-column mode.
Dataset load_csv(const std::string& path, const LoadOptions& opts = {},
                 LoadStats* stats = nullptr);

// Canonical cleaned output: comma-delimited, columns in kCanonicalFeatures
// order plus cardio, age in years. Values round-trip exactly.
void write_csv(const Dataset& ds, const std::string& path);

// Replaces NaN entries with the most frequent non-NaN value; ties break toward
// the smaller value.
std::vector<double> impute_mode(const std::vector<double>& column);

ScalingParams fit_scaling(const Dataset& ds, std::span<const std::size_t> rows);
ScalingParams fit_scaling(const Dataset& ds);

// (x - min) / (max - min) per column; constant columns map to 0; values outside
// the fitted range are not clipped.
Dataset apply_scaling(const Dataset& ds, const ScalingParams& params);

SplitIndices train_test_split(std::size_t n, double train_fraction, std::uint64_t seed,
                              const std::vector<int>* stratify_labels = nullptr);

FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed,
               const std::vector<int>* stratify_labels = nullptr);

Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows);
Dataset select_features(const Dataset& ds, std::span<const std::size_t> feature_idx);

} // namespace cvd
