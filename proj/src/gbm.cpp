#include "cvd/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cvd/errors.hpp"

namespace cvd {

namespace {

constexpr double kNewtonDenomFloor = 1e-12;
constexpr double kProbabilityClamp = 1e-15; // keeps predict_proba inside (0,1)
constexpr int kModelFormatVersion = 1;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Per-sample binomial log-loss at raw score f.
double log_loss(int label, double f) { return label == 1 ? softplus(-f) : softplus(f); }

void validate_width(const GbmModel& model, const Matrix& rows) {
    if (rows.cols() != model.n_features) throw ValidationError("gbm predict: width mismatch");
}

nlohmann::json node_to_json(const Tree& tree, int id) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    nlohmann::json j;
    if (node.is_leaf()) {
        j["leaf"] = node.value;
        j["n_samples"] = node.n_samples;
        return j;
    }
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["impurity_decrease"] = node.impurity_decrease;
    j["n_samples"] = node.n_samples;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
    return j;
}

int node_from_json(const nlohmann::json& j, Tree& tree) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    if (j.contains("leaf")) {
        tree.nodes[static_cast<std::size_t>(id)].value = j.at("leaf").get<double>();
        tree.nodes[static_cast<std::size_t>(id)].n_samples =
            j.value("n_samples", std::uint64_t{0});
        return id;
    }
    TreeNode node;
    node.feature = j.at("feature").get<int>();
    node.threshold = j.at("threshold").get<double>();
    node.impurity_decrease = j.value("impurity_decrease", 0.0);
    node.n_samples = j.value("n_samples", std::uint64_t{0});
    tree.nodes[static_cast<std::size_t>(id)] = node;
    const int left = node_from_json(j.at("left"), tree);
    const int right = node_from_json(j.at("right"), tree);
    tree.nodes[static_cast<std::size_t>(id)].left = left;
    tree.nodes[static_cast<std::size_t>(id)].right = right;
    return id;
}

} // namespace

double sigmoid(double score) {
    if (score >= 0.0) return 1.0 / (1.0 + std::exp(-score));
    const double e = std::exp(score);
    return e / (1.0 + e);
}

GbmModel fit_gbm(const Dataset& train, const GbmConfig& config) {
    const std::size_t n = train.n_rows();
    if (n == 0) throw TrainingError("fit_gbm: empty dataset");
    if (config.n_stages < 1) throw ValidationError("fit_gbm: n_stages must be >= 1");
    if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0))
        throw ValidationError("fit_gbm: learning_rate out of range (0,1]");

    std::size_t positives = 0;
    for (int y : train.labels) positives += static_cast<std::size_t>(y);
    if (positives == 0 || positives == n)
        throw TrainingError(
            "fit_gbm: all labels identical; the initial log-odds are infinite - use a "
            "constant predictor for this data");

    GbmModel model;
    model.n_features = train.n_features();
    model.feature_names = train.feature_names;
    const double p_bar = static_cast<double>(positives) / static_cast<double>(n);
    model.initial_score = std::log(p_bar / (1.0 - p_bar));
    model.stages.reserve(config.n_stages);

    const FeatureSortOrder sorted = sort_features(train.features);
    std::vector<double> score(n, model.initial_score);
    std::vector<double> residual(n);
    std::vector<double> curvature(n); // sigma(F) * (1 - sigma(F))

    for (std::size_t stage = 0; stage < config.n_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(score[i]);
            residual[i] = static_cast<double>(train.labels[i]) - p;
            curvature[i] = p * (1.0 - p);
        }
        Tree tree =
            fit_regression_tree_presorted(train.features, sorted, residual, {}, config.tree);

        // One Newton-Raphson step per leaf: sum(residual) / sum(p(1-p)).
        const std::vector<std::int32_t> leaf_of_row = assign_leaves(tree, train.features);
        std::vector<double> numer(tree.nodes.size(), 0.0);
        std::vector<double> denom(tree.nodes.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            numer[static_cast<std::size_t>(leaf_of_row[i])] += residual[i];
            denom[static_cast<std::size_t>(leaf_of_row[i])] += curvature[i];
        }
        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            TreeNode& node = tree.nodes[id];
            if (!node.is_leaf()) continue;
            node.value = denom[id] < kNewtonDenomFloor ? 0.0 : numer[id] / denom[id];
        }

        for (std::size_t i = 0; i < n; ++i)
            score[i] += config.learning_rate *
                        tree.nodes[static_cast<std::size_t>(leaf_of_row[i])].value;
        model.stages.push_back(GbmStage{std::move(tree), config.learning_rate});
    }
    return model;
}

std::vector<double> predict_score(const GbmModel& model, const Matrix& rows) {
    validate_width(model, rows);
    std::vector<double> score(rows.rows(), model.initial_score);
    for (const GbmStage& stage : model.stages)
        for (std::size_t r = 0; r < rows.rows(); ++r)
            score[r] += stage.learning_rate * predict_tree(stage.tree, rows.row(r));
    return score;
}

std::vector<double> predict_proba(const GbmModel& model, const Matrix& rows) {
    std::vector<double> out = predict_score(model, rows);
    for (double& v : out)
        v = std::clamp(sigmoid(v), kProbabilityClamp, 1.0 - kProbabilityClamp);
    return out;
}

std::vector<int> predict_label(const GbmModel& model, const Matrix& rows, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ValidationError("predict_label: threshold outside (0,1)");
    const std::vector<double> proba = predict_proba(model, rows);
    std::vector<int> labels(proba.size());
    for (std::size_t i = 0; i < proba.size(); ++i) labels[i] = proba[i] >= threshold ? 1 : 0;
    return labels;
}

std::vector<double> staged_train_loss(const GbmModel& model, const Dataset& train) {
    if (train.n_features() != model.n_features)
        throw ValidationError("staged_train_loss: width mismatch");
    const std::size_t n = train.n_rows();
    if (n == 0) throw ValidationError("staged_train_loss: empty dataset");
    std::vector<double> score(n, model.initial_score);
    std::vector<double> losses;
    losses.reserve(model.stages.size() + 1);
    auto mean_loss = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += log_loss(train.labels[i], score[i]);
        return sum / static_cast<double>(n);
    };
    losses.push_back(mean_loss());
    for (const GbmStage& stage : model.stages) {
        for (std::size_t r = 0; r < n; ++r)
            score[r] += stage.learning_rate * predict_tree(stage.tree, train.features.row(r));
        losses.push_back(mean_loss());
    }
    return losses;
}

std::vector<double> gbm_importances(const GbmModel& model) {
    std::vector<double> total(model.n_features, 0.0);
    bool any_split = false;
    for (const GbmStage& stage : model.stages) {
        if (!stage.tree.has_split()) continue;
        any_split = true;
        const std::vector<double> imp = tree_importances(stage.tree, model.n_features);
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += imp[j];
    }
    if (!any_split) throw TrainingError("gbm_importances: no splits; importances undefined");
    double sum = 0.0;
    for (double v : total) sum += v;
    for (double& v : total) v /= sum;
    return total;
}

nlohmann::json gbm_to_json(const GbmModel& model) {
    nlohmann::json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["feature_names"] = model.feature_names;
    doc["initial_score"] = model.initial_score;
    doc["learning_rate"] = model.stages.empty() ? 0.0 : model.stages.front().learning_rate;
    nlohmann::json stages = nlohmann::json::array();
    for (const GbmStage& stage : model.stages) stages.push_back(node_to_json(stage.tree, 0));
    doc["stages"] = std::move(stages);
    return doc;
}

GbmModel gbm_from_json(const nlohmann::json& doc) {
    if (!doc.contains("format_version") || doc.at("format_version").get<int>() != kModelFormatVersion)
        throw ValidationError("gbm model file: unsupported format_version");
    GbmModel model;
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.n_features = model.feature_names.size();
    model.initial_score = doc.at("initial_score").get<double>();
    const double rate = doc.at("learning_rate").get<double>();
    for (const nlohmann::json& stage_doc : doc.at("stages")) {
        GbmStage stage;
        stage.learning_rate = rate;
        node_from_json(stage_doc, stage.tree);
        if (stage.tree.max_feature_index() >= static_cast<int>(model.n_features))
            throw ValidationError("gbm model file: tree references unknown feature");
        model.stages.push_back(std::move(stage));
    }
    return model;
}

void save_gbm(const GbmModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << gbm_to_json(model).dump(2) << '\n';
    if (!out) throw ValidationError("write failed: " + path);
}

GbmModel load_gbm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("gbm model file: invalid JSON: ") + e.what());
    }
    return gbm_from_json(doc);
}

} // namespace cvd
