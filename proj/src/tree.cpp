#include "cvd/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cvd/errors.hpp"

namespace cvd {

namespace {

constexpr double kGainEpsilon = 1e-12; // ties and "zero reduction" threshold

enum class SplitObjective { kSquaredError, kGini };

struct NodeStats {
    double w = 0.0;
    double wy = 0.0;
    double wyy = 0.0;
    std::uint64_t count = 0;

    void add(double weight, double y) {
        w += weight;
        wy += weight * y;
        wyy += weight * y * y;
        ++count;
    }
};

double impurity(const NodeStats& s, SplitObjective objective) {
    if (s.w <= 0.0) return 0.0;
    double imp;
    if (objective == SplitObjective::kSquaredError)
        imp = s.wyy - s.wy * s.wy / s.w; // total weighted SSE around the mean
    else
        imp = 2.0 * s.wy * (s.w - s.wy) / s.w; // total weighted Gini, y in {0,1}
    return imp < 0.0 ? 0.0 : imp;
}

// Midpoint kept strictly below the upper value, so `v <= threshold` routes
// exactly the prefix that produced the candidate.
double split_threshold(double lo, double hi) {
    double t = lo + (hi - lo) * 0.5;
    if (!(t < hi)) t = lo;
    return t;
}

struct CandidateSplit {
    bool found = false;
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

Tree fit_tree_impl(const Matrix& x, const FeatureSortOrder& sorted,
                   std::span<const double> targets, std::span<const double> weights,
                   const TreeConfig& config, SplitObjective objective) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0) throw ValidationError("tree fit: empty input");
    if (targets.size() != n) throw ValidationError("tree fit: target length mismatch");
    if (!weights.empty() && weights.size() != n)
        throw ValidationError("tree fit: weight length mismatch");
    if (config.min_samples_split < 2) throw ValidationError("tree fit: min_samples_split < 2");
    if (config.min_samples_leaf < 1) throw ValidationError("tree fit: min_samples_leaf < 1");
    for (double w : weights)
        if (w < 0.0) throw ValidationError("tree fit: negative weight");

    auto weight_of = [&](std::size_t r) { return weights.empty() ? 1.0 : weights[r]; };

    // node id per row; -1 excludes zero-weight rows from the fit entirely.
    std::vector<std::int32_t> node_of_row(n, -1);
    NodeStats root_stats;
    for (std::size_t r = 0; r < n; ++r) {
        const double w = weight_of(r);
        if (w <= 0.0) continue;
        node_of_row[r] = 0;
        root_stats.add(w, targets[r]);
    }
    if (root_stats.count == 0) throw ValidationError("tree fit: empty input");

    Tree tree;
    tree.nodes.push_back(TreeNode{});
    tree.nodes[0].value = root_stats.wy / root_stats.w;
    tree.nodes[0].n_samples = root_stats.count;

    std::vector<std::int32_t> frontier = {0};
    std::vector<NodeStats> frontier_stats = {root_stats};
    std::size_t depth = 0;

    std::vector<std::int32_t> slot_of_node; // node id -> frontier slot (or -1)
    while (!frontier.empty() && depth < config.max_depth) {
        const std::size_t m = frontier.size();
        std::vector<double> node_impurity(m);
        std::vector<bool> splittable(m);
        bool any = false;
        for (std::size_t s = 0; s < m; ++s) {
            node_impurity[s] = impurity(frontier_stats[s], objective);
            splittable[s] = frontier_stats[s].count >= config.min_samples_split &&
                            node_impurity[s] > kGainEpsilon;
            any = any || splittable[s];
        }
        if (!any) break;

        slot_of_node.assign(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < m; ++s) slot_of_node[frontier[s]] = static_cast<std::int32_t>(s);

        std::vector<CandidateSplit> best(m);
        std::vector<NodeStats> prefix(m);
        std::vector<double> last_value(m);
        std::vector<bool> seen(m);
        for (std::size_t j = 0; j < d; ++j) {
            std::fill(prefix.begin(), prefix.end(), NodeStats{});
            std::fill(seen.begin(), seen.end(), false);
            for (const std::uint32_t r : sorted.order[j]) {
                const std::int32_t node = node_of_row[r];
                if (node < 0) continue;
                const std::int32_t s = slot_of_node[node];
                if (s < 0 || !splittable[s]) continue;
                const double v = x(r, j);
                if (seen[s] && v > last_value[s]) {
                    const NodeStats& left = prefix[s];
                    const std::uint64_t right_count = frontier_stats[s].count - left.count;
                    if (left.count >= config.min_samples_leaf &&
                        right_count >= config.min_samples_leaf) {
                        NodeStats right;
                        right.w = frontier_stats[s].w - left.w;
                        right.wy = frontier_stats[s].wy - left.wy;
                        right.wyy = frontier_stats[s].wyy - left.wyy;
                        right.count = right_count;
                        const double gain = node_impurity[s] - impurity(left, objective) -
                                            impurity(right, objective);
                        // Strictly-better-by-epsilon keeps the first candidate in
                        // (feature, threshold) order on ties; the initial 0 gain
                        // also enforces the zero-reduction stop.
                        if (gain > best[s].gain + kGainEpsilon) {
                            best[s].found = true;
                            best[s].gain = gain;
                            best[s].feature = static_cast<int>(j);
                            best[s].threshold = split_threshold(last_value[s], v);
                        }
                    }
                }
                prefix[s].add(weight_of(r), targets[r]);
                last_value[s] = v;
                seen[s] = true;
            }
        }

        // Apply the chosen splits and build the next frontier.
        std::vector<std::int32_t> next_frontier;
        bool split_any = false;
        for (std::size_t s = 0; s < m; ++s) {
            if (!splittable[s] || !best[s].found) continue;
            const int left_id = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(TreeNode{});
            tree.nodes.push_back(TreeNode{});
            TreeNode& parent = tree.nodes[static_cast<std::size_t>(frontier[s])];
            parent.feature = best[s].feature;
            parent.threshold = best[s].threshold;
            parent.impurity_decrease = best[s].gain;
            parent.left = left_id;
            parent.right = left_id + 1;
            next_frontier.push_back(parent.left);
            next_frontier.push_back(parent.right);
            split_any = true;
        }
        if (!split_any) break;

        // Route rows of split nodes and recompute child stats from scratch.
        std::vector<NodeStats> next_stats(next_frontier.size());
        std::vector<std::int32_t> next_slot(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < next_frontier.size(); ++s)
            next_slot[next_frontier[s]] = static_cast<std::int32_t>(s);
        for (std::size_t r = 0; r < n; ++r) {
            const std::int32_t node = node_of_row[r];
            if (node < 0) continue;
            const TreeNode& parent = tree.nodes[node];
            if (parent.is_leaf()) continue;
            const std::int32_t child = x(r, static_cast<std::size_t>(parent.feature)) <=
                                               parent.threshold
                                           ? parent.left
                                           : parent.right;
            node_of_row[r] = child;
            next_stats[next_slot[child]].add(weight_of(r), targets[r]);
        }
        for (std::size_t s = 0; s < next_frontier.size(); ++s) {
            TreeNode& child = tree.nodes[next_frontier[s]];
            child.n_samples = next_stats[s].count;
            child.value = next_stats[s].w > 0.0 ? next_stats[s].wy / next_stats[s].w : 0.0;
        }
        frontier = std::move(next_frontier);
        frontier_stats = std::move(next_stats);
        ++depth;
    }
    return tree;
}

} // namespace

bool Tree::has_split() const {
    for (const TreeNode& n : nodes)
        if (!n.is_leaf()) return true;
    return false;
}

int Tree::max_feature_index() const {
    int mx = -1;
    for (const TreeNode& n : nodes)
        if (!n.is_leaf()) mx = std::max(mx, n.feature);
    return mx;
}

FeatureSortOrder sort_features(const Matrix& x) {
    FeatureSortOrder sorted;
    sorted.order.resize(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        auto& ord = sorted.order[j];
        ord.resize(x.rows());
        std::iota(ord.begin(), ord.end(), 0u);
        std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
            return x(a, j) < x(b, j);
        });
    }
    return sorted;
}

Tree fit_regression_tree(const Matrix& x, std::span<const double> targets,
                         std::span<const double> weights, const TreeConfig& config) {
    return fit_tree_impl(x, sort_features(x), targets, weights, config,
                         SplitObjective::kSquaredError);
}

Tree fit_regression_tree_presorted(const Matrix& x, const FeatureSortOrder& sorted,
                                   std::span<const double> targets,
                                   std::span<const double> weights, const TreeConfig& config) {
    return fit_tree_impl(x, sorted, targets, weights, config, SplitObjective::kSquaredError);
}

Tree fit_classification_tree(const Matrix& x, const std::vector<int>& labels,
                             const TreeConfig& config) {
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw ValidationError("tree fit: non-binary label");
        y[i] = labels[i];
    }
    return fit_tree_impl(x, sort_features(x), y, {}, config, SplitObjective::kGini);
}

double predict_tree(const Tree& tree, std::span<const double> row) {
    if (tree.empty()) throw ValidationError("predict_tree: empty tree");
    const TreeNode* node = &tree.root();
    while (!node->is_leaf()) {
        const std::size_t f = static_cast<std::size_t>(node->feature);
        if (f >= row.size()) throw ValidationError("predict_tree: row too short");
        node = &tree.nodes[static_cast<std::size_t>(row[f] <= node->threshold ? node->left
                                                                              : node->right)];
    }
    return node->value;
}

std::vector<double> predict_tree_rows(const Tree& tree, const Matrix& rows) {
    std::vector<double> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out[r] = predict_tree(tree, rows.row(r));
    return out;
}

std::vector<std::int32_t> assign_leaves(const Tree& tree, const Matrix& rows) {
    std::vector<std::int32_t> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        std::int32_t id = 0;
        while (!tree.nodes[static_cast<std::size_t>(id)].is_leaf()) {
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
            const std::size_t f = static_cast<std::size_t>(node.feature);
            if (f >= rows.cols()) throw ValidationError("assign_leaves: row too short");
            id = rows(r, f) <= node.threshold ? node.left : node.right;
        }
        out[r] = id;
    }
    return out;
}

std::vector<double> tree_importances(const Tree& tree, std::size_t n_features) {
    std::vector<double> imp(n_features, 0.0);
    if (tree.empty()) return imp;
    const double total = static_cast<double>(tree.root().n_samples);
    for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf()) continue;
        if (static_cast<std::size_t>(node.feature) >= n_features)
            throw ValidationError("tree_importances: feature index out of range");
        imp[static_cast<std::size_t>(node.feature)] +=
            static_cast<double>(node.n_samples) / total * node.impurity_decrease;
    }
    return imp;
}

} // namespace cvd
