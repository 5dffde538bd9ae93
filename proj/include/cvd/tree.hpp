#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvd/matrix.hpp"

namespace cvd {

struct TreeConfig {
    std::size_t max_depth = 3;
    std::size_t min_samples_split = 10;
    std::size_t min_samples_leaf = 5;
};

// Flat node storage; nodes[0] is the root. feature < 0 marks a leaf.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;             // leaf prediction (mean / class-1 fraction)
    double impurity_decrease = 0.0; // within-node total impurity drop of the split
    std::uint64_t n_samples = 0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    bool empty() const { return nodes.empty(); }
    const TreeNode& root() const { return nodes.front(); }
    bool has_split() const;
    int max_feature_index() const;
};

// Row ids per feature, ascending by value (ties by row id). Built once per
// matrix and reused across boosting stages.
struct FeatureSortOrder {
    std::vector<std::vector<std::uint32_t>> order;
};

FeatureSortOrder sort_features(const Matrix& x);

// Greedy CART on squared error. Thresholds are midpoints between consecutive
// distinct values; equal gains (within 1e-12) resolve to the smallest feature
// index, then the smallest threshold. Empty `weights` means unit weights;
// zero-weight rows are excluded from the fit.
Tree fit_regression_tree(const Matrix& x, std::span<const double> targets,
                         std::span<const double> weights, const TreeConfig& config);

Tree fit_regression_tree_presorted(const Matrix& x, const FeatureSortOrder& sorted,
                                   std::span<const double> targets,
                                   std::span<const double> weights, const TreeConfig& config);

// Same search with Gini impurity; leaves hold the class-1 fraction.
Tree fit_classification_tree(const Matrix& x, const std::vector<int>& labels,
                             const TreeConfig& config);

double predict_tree(const Tree& tree, std::span<const double> row);
std::vector<double> predict_tree_rows(const Tree& tree, const Matrix& rows);

// Leaf node id for every row; used for the boosting leaf updates.
std::vector<std::int32_t> assign_leaves(const Tree& tree, const Matrix& rows);

// Entry j sums (n_samples/total) * impurity_decrease over nodes splitting on j.
std::vector<double> tree_importances(const Tree& tree, std::size_t n_features);

} // namespace cvd
