#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cvd/errors.hpp"
#include "cvd/rng.hpp"
#include "cvd/tree.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace cvd;

namespace {

const TreeConfig kPermissive{/*max_depth=*/8, /*min_samples_split=*/2, /*min_samples_leaf=*/1};

Matrix column(const std::vector<double>& values) {
    std::vector<std::vector<double>> rows;
    for (double v : values) rows.push_back({v});
    return Matrix::from_rows(rows);
}

double training_sse(const Tree& tree, const Matrix& x, const std::vector<double>& y) {
    double sse = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double diff = y[r] - predict_tree(tree, x.row(r));
        sse += diff * diff;
    }
    return sse;
}

// Total Gini over leaves, recomputed from leaf memberships.
double training_gini(const Tree& tree, const Matrix& x) {
    const std::vector<std::int32_t> leaves = assign_leaves(tree, x);
    double total = 0.0;
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        if (!tree.nodes[id].is_leaf()) continue;
        std::size_t count = 0;
        for (std::int32_t leaf : leaves) count += static_cast<std::size_t>(
            leaf == static_cast<std::int32_t>(id));
        const double p = tree.nodes[id].value;
        total += static_cast<double>(count) * 2.0 * p * (1.0 - p);
    }
    return total;
}

} // namespace

TEST_CASE("regression tree splits the step function") {
    const Matrix x = column({1, 2, 3, 4});
    const std::vector<double> y = {0, 0, 1, 1};
    TreeConfig config = kPermissive;
    config.max_depth = 1;
    const Tree tree = fit_regression_tree(x, y, {}, config);
    REQUIRE(!tree.root().is_leaf());
    CHECK(tree.root().feature == 0);
    CHECK(tree.root().threshold == doctest::Approx(2.5));
    CHECK(tree.root().impurity_decrease == doctest::Approx(1.0)); // total SSE 1.0 -> 0
    CHECK(tree.nodes[static_cast<std::size_t>(tree.root().left)].value == doctest::Approx(0.0));
    CHECK(tree.nodes[static_cast<std::size_t>(tree.root().right)].value == doctest::Approx(1.0));
    CHECK(tree.root().n_samples == 4);

    // Routing: the boundary value goes left, above it goes right.
    CHECK(predict_tree(tree, std::vector<double>{2.5}) == doctest::Approx(0.0));
    CHECK(predict_tree(tree, std::vector<double>{3.0}) == doctest::Approx(1.0));
}

TEST_CASE("constant targets give a single leaf") {
    const Matrix x = column({1, 2, 3});
    const std::vector<double> y = {5, 5, 5};
    const Tree tree = fit_regression_tree(x, y, {}, kPermissive);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.root().value == doctest::Approx(5.0));
}

TEST_CASE("max_depth zero forces a root leaf") {
    const Matrix x = column({1, 2, 3, 4});
    const std::vector<double> y = {0, 0, 1, 1};
    TreeConfig config = kPermissive;
    config.max_depth = 0;
    const Tree tree = fit_regression_tree(x, y, {}, config);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.root().value == doctest::Approx(0.5)); // mean of y
}

TEST_CASE("classification tree edge cases") {
    const Matrix pure_x = column({1, 2, 3});
    const Tree pure = fit_classification_tree(pure_x, {1, 1, 1}, kPermissive);
    REQUIRE(pure.nodes.size() == 1);
    CHECK(pure.root().value == doctest::Approx(1.0));

    const Matrix x = column({0, 0, 1, 1});
    const Tree split = fit_classification_tree(x, {0, 0, 1, 1}, kPermissive);
    REQUIRE(!split.root().is_leaf());
    CHECK(split.root().threshold == doctest::Approx(0.5));
    CHECK(split.nodes[static_cast<std::size_t>(split.root().left)].value == doctest::Approx(0.0));
    CHECK(split.nodes[static_cast<std::size_t>(split.root().right)].value == doctest::Approx(1.0));

    // No separating split exists for identical rows.
    const Matrix same = column({7, 7});
    const Tree leaf = fit_classification_tree(same, {0, 1}, kPermissive);
    REQUIRE(leaf.nodes.size() == 1);
    CHECK(leaf.root().value == doctest::Approx(0.5));
}

TEST_CASE("predict validates the row width") {
    const Matrix x = Matrix::from_rows({{1, 10}, {2, 20}, {3, 30}, {4, 40}});
    const std::vector<double> y = {0, 0, 1, 1};
    const Tree tree = fit_regression_tree(x, y, {}, kPermissive);
    REQUIRE(tree.has_split());
    CHECK_THROWS_AS(predict_tree(tree, std::vector<double>{}), ValidationError);
}

TEST_CASE("leaf-only tree predicts its value for any row") {
    Tree tree;
    TreeNode leaf;
    leaf.value = 0.3;
    leaf.n_samples = 10;
    tree.nodes.push_back(leaf);
    CHECK(predict_tree(tree, std::vector<double>{}) == doctest::Approx(0.3));
    CHECK(tree_importances(tree, 4) == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("importances of a hand-built two-level tree") {
    // Root splits on f0 (decrease 1.0, full weight); its left child splits on
    // f1 (decrease 0.5, half the samples).
    Tree tree;
    tree.nodes.resize(5);
    tree.nodes[0].feature = 0;
    tree.nodes[0].threshold = 0.0;
    tree.nodes[0].left = 1;
    tree.nodes[0].right = 2;
    tree.nodes[0].impurity_decrease = 1.0;
    tree.nodes[0].n_samples = 100;
    tree.nodes[1].feature = 1;
    tree.nodes[1].threshold = 0.0;
    tree.nodes[1].left = 3;
    tree.nodes[1].right = 4;
    tree.nodes[1].impurity_decrease = 0.5;
    tree.nodes[1].n_samples = 50;
    tree.nodes[2].n_samples = 50;
    tree.nodes[3].n_samples = 25;
    tree.nodes[4].n_samples = 25;
    const std::vector<double> imp = tree_importances(tree, 2);
    CHECK(imp[0] == doctest::Approx(1.0));
    CHECK(imp[1] == doctest::Approx(0.25));
    CHECK_THROWS_AS(tree_importances(tree, 1), ValidationError);
}

TEST_CASE("single root split concentrates importance") {
    const Matrix x = Matrix::from_rows({{1, 5}, {2, 5}, {3, 5}, {4, 5}});
    const std::vector<double> y = {0, 0, 1, 1};
    TreeConfig config = kPermissive;
    config.max_depth = 1;
    const Tree tree = fit_regression_tree(x, y, {}, config);
    const std::vector<double> imp = tree_importances(tree, 2);
    CHECK(imp[0] == doctest::Approx(1.0));
    CHECK(imp[1] == 0.0);
}

TEST_CASE("importance total equals the weighted sum of decreases") {
    Rng rng(41);
    for (int it = 0; it < 25; ++it) {
        const std::size_t n = 10 + rng.bounded(40);
        std::vector<std::vector<double>> rows;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
            y.push_back(rng.next_normal());
        }
        const Matrix x = Matrix::from_rows(rows);
        TreeConfig config = kPermissive;
        config.max_depth = 3;
        const Tree tree = fit_regression_tree(x, y, {}, config);
        const std::vector<double> imp = tree_importances(tree, 3);
        double from_vector = 0.0;
        for (double v : imp) from_vector += v;
        double from_nodes = 0.0;
        for (const TreeNode& node : tree.nodes)
            if (!node.is_leaf())
                from_nodes += static_cast<double>(node.n_samples) /
                              static_cast<double>(tree.root().n_samples) * node.impurity_decrease;
        CHECK(from_vector == doctest::Approx(from_nodes).epsilon(1e-10));
    }
}

TEST_CASE("fitted loss matches the naive greedy oracle") {
    Rng rng(2718);
    for (int it = 0; it < 60; ++it) {
        const std::size_t n = 4 + rng.bounded(22);
        const std::size_t d = 1 + rng.bounded(3);
        std::vector<std::vector<double>> rows;
        std::vector<double> y;
        std::vector<int> labels;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(d);
            for (double& v : row)
                v = it % 2 == 0 ? rng.next_double() : static_cast<double>(rng.bounded(4));
            rows.push_back(row);
            const int label = static_cast<int>(rng.bounded(2));
            labels.push_back(label);
            y.push_back(it % 3 == 0 ? static_cast<double>(label) : rng.next_normal());
        }
        const Matrix x = Matrix::from_rows(rows);

        oracles::NaiveTreeParams params;
        params.max_depth = 2;
        TreeConfig config;
        config.max_depth = 2;
        config.min_samples_split = 2;
        config.min_samples_leaf = 1;

        const Tree reg = fit_regression_tree(x, y, {}, config);
        CHECK(training_sse(reg, x, y) ==
              doctest::Approx(oracles::naive_greedy_loss(rows, y, params)).epsilon(1e-10));

        params.gini = true;
        std::vector<double> y01(labels.begin(), labels.end());
        const Tree cls = fit_classification_tree(x, labels, config);
        CHECK(training_gini(cls, x) ==
              doctest::Approx(oracles::naive_greedy_loss(rows, y01, params)).epsilon(1e-10));
    }
}

TEST_CASE("deeper trees never fit worse on the training data") {
    Rng rng(33);
    for (int it = 0; it < 15; ++it) {
        const std::size_t n = 20 + rng.bounded(30);
        std::vector<std::vector<double>> rows;
        std::vector<double> y;
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back({rng.next_double(), rng.next_double()});
            y.push_back(rng.next_normal());
        }
        const Matrix x = Matrix::from_rows(rows);
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t depth : {0u, 1u, 2u, 4u}) {
            TreeConfig config = kPermissive;
            config.max_depth = depth;
            const double sse = training_sse(fit_regression_tree(x, y, {}, config), x, y);
            CHECK(sse <= previous + 1e-9);
            previous = sse;
        }
    }
}

TEST_CASE("unlimited depth memorizes distinct rows") {
    Rng rng(55);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (std::size_t i = 0; i < 32; ++i) {
        rows.push_back({static_cast<double>(i) + 0.25 * rng.next_double()});
        y.push_back(rng.next_normal());
    }
    const Matrix x = Matrix::from_rows(rows);
    TreeConfig config;
    config.max_depth = 64;
    config.min_samples_split = 2;
    config.min_samples_leaf = 1;
    const Tree tree = fit_regression_tree(x, y, {}, config);
    for (std::size_t r = 0; r < x.rows(); ++r)
        CHECK(predict_tree(tree, x.row(r)) == doctest::Approx(y[r]).epsilon(1e-12));
}

TEST_CASE("zero-weight rows are ignored") {
    const Matrix x = column({1, 2, 3, 4, 100});
    const std::vector<double> y = {0, 0, 1, 1, 500};
    const std::vector<double> w = {1, 1, 1, 1, 0};
    TreeConfig config = kPermissive;
    const Tree weighted = fit_regression_tree(x, y, w, config);

    const Matrix x_sub = column({1, 2, 3, 4});
    const std::vector<double> y_sub = {0, 0, 1, 1};
    const Tree subset = fit_regression_tree(x_sub, y_sub, {}, config);
    REQUIRE(weighted.nodes.size() == subset.nodes.size());
    for (std::size_t i = 0; i < weighted.nodes.size(); ++i) {
        CHECK(weighted.nodes[i].feature == subset.nodes[i].feature);
        CHECK(weighted.nodes[i].threshold == subset.nodes[i].threshold);
        CHECK(weighted.nodes[i].value == subset.nodes[i].value);
    }
}

TEST_CASE("fit rejects bad input") {
    const Matrix x = column({1, 2});
    const std::vector<double> y = {0, 1};
    CHECK_THROWS_AS(fit_regression_tree(Matrix(), {}, {}, kPermissive), ValidationError);
    const std::vector<double> negative = {1, -1};
    CHECK_THROWS_AS(fit_regression_tree(x, y, negative, kPermissive), ValidationError);
    const std::vector<double> zeros = {0, 0};
    CHECK_THROWS_AS(fit_regression_tree(x, y, zeros, kPermissive), ValidationError);
    CHECK_THROWS_AS(fit_classification_tree(x, {0, 2}, kPermissive), ValidationError);
}

TEST_CASE("presorted fit matches the one-shot entry point") {
    Rng rng(91);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (std::size_t i = 0; i < 80; ++i) {
        rows.push_back({rng.next_double(), static_cast<double>(rng.bounded(5)), rng.next_double()});
        y.push_back(rng.next_normal());
    }
    const Matrix x = Matrix::from_rows(rows);
    TreeConfig config;
    config.max_depth = 3;
    config.min_samples_split = 4;
    config.min_samples_leaf = 2;
    const Tree direct = fit_regression_tree(x, y, {}, config);
    const FeatureSortOrder sorted = sort_features(x);
    const Tree presorted = fit_regression_tree_presorted(x, sorted, y, {}, config);
    REQUIRE(direct.nodes.size() == presorted.nodes.size());
    for (std::size_t i = 0; i < direct.nodes.size(); ++i) {
        CHECK(direct.nodes[i].feature == presorted.nodes[i].feature);
        CHECK(direct.nodes[i].threshold == presorted.nodes[i].threshold);
        CHECK(direct.nodes[i].value == presorted.nodes[i].value);
    }
}

TEST_CASE("min_samples constraints hold everywhere") {
    Rng rng(123);
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (std::size_t i = 0; i < 60; ++i) {
        rows.push_back({rng.next_double()});
        y.push_back(rng.next_normal());
    }
    const Matrix x = Matrix::from_rows(rows);
    TreeConfig config;
    config.max_depth = 6;
    config.min_samples_split = 10;
    config.min_samples_leaf = 4;
    const Tree tree = fit_regression_tree(x, y, {}, config);
    for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf())
            CHECK(node.n_samples >= config.min_samples_leaf);
        else
            CHECK(node.n_samples >= config.min_samples_split);
    }
}
