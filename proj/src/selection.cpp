#include "cvd/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "cvd/errors.hpp"
#include "cvd/parallel.hpp"
#include "cvd/rng.hpp"

namespace cvd {

namespace {

// Recursive elimination engine: every round refits the criterion on the
// survivors and drops the `step` weakest (fewer on the last round, never below
// min_count). survivors_at[c] snapshots the active set (ascending original
// indices) whenever exactly c features remain; the procedure is greedy and
// deterministic, so with step 1 the chain visits every state a shorter
// elimination to any c >= min_count would produce.
struct EliminationChain {
    std::vector<std::size_t> eliminated; // first-eliminated .. last-eliminated
    std::map<std::size_t, std::vector<std::size_t>> survivors_at;
    std::vector<double> final_criterion; // per surviving feature, last fit
    std::vector<std::size_t> final_active;
};

EliminationChain eliminate_to(const Dataset& train, const RankConfig& config, std::size_t step,
                              std::size_t min_count) {
    const std::size_t d = train.n_features();
    EliminationChain chain;
    std::vector<std::size_t> active(d);
    std::iota(active.begin(), active.end(), std::size_t{0});
    chain.survivors_at[d] = active;

    while (active.size() > min_count) {
        const Dataset view = select_features(train, active);
        const std::vector<double> criterion = rank_features(view, config);
        std::vector<std::size_t> order(active.size()); // local ids, weakest first
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return criterion[a] < criterion[b];
        });
        const std::size_t batch = std::min(step, active.size() - min_count);
        std::vector<bool> drop(active.size(), false);
        for (std::size_t i = 0; i < batch; ++i) {
            drop[order[i]] = true;
            chain.eliminated.push_back(active[order[i]]);
        }
        std::vector<std::size_t> next;
        next.reserve(active.size() - batch);
        std::vector<double> next_criterion;
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (drop[i]) continue;
            next.push_back(active[i]);
            next_criterion.push_back(criterion[i]);
        }
        active = std::move(next);
        chain.final_criterion = std::move(next_criterion);
        chain.survivors_at[active.size()] = active;
    }
    chain.final_active = active;
    if (chain.final_criterion.empty()) chain.final_criterion.assign(active.size(), 0.0);
    return chain;
}

std::vector<std::size_t> survivors_by_criterion_desc(const EliminationChain& chain) {
    std::vector<std::size_t> order(chain.final_active.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return chain.final_criterion[a] > chain.final_criterion[b];
    });
    std::vector<std::size_t> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(chain.final_active[i]);
    return out;
}

RfeResult chain_to_result(const Dataset& train, const EliminationChain& chain) {
    RfeResult result;
    result.ranking = chain.eliminated;
    const std::vector<std::size_t> survivors = survivors_by_criterion_desc(chain);
    result.ranking.insert(result.ranking.end(), survivors.begin(), survivors.end());
    result.selected_count = survivors.size();
    for (std::size_t j : survivors) result.selected_features.push_back(train.feature_names[j]);
    return result;
}

} // namespace

LinearMarginModel fit_linear_margin_model(const Dataset& train, const LinearFitConfig& config) {
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_features();
    if (n == 0) throw TrainingError("fit_linear_margin_model: empty dataset");
    if (config.epochs == 0) throw ValidationError("fit_linear_margin_model: epochs must be >= 1");
    if (!(config.regularization > 0.0))
        throw ValidationError("fit_linear_margin_model: regularization must be > 0");

    bool has0 = false, has1 = false;
    for (int y : train.labels) (y == 0 ? has0 : has1) = true;
    if (!has0 || !has1)
        throw TrainingError("fit_linear_margin_model: both classes must be present");

    LinearMarginModel model;
    model.w.assign(d, 0.0);
    model.config = config;

    // Pegasos-style updates on the augmented vector (w, b): eta_t =
    // step_scale / (lambda * t), margin misses pull toward z * (x, 1). The
    // returned model averages the second half of the iterates, which settles
    // the oscillation of the raw final iterate.
    Rng rng(config.seed);
    const double lambda = config.regularization;
    const std::uint64_t total_steps = static_cast<std::uint64_t>(config.epochs) * n;
    const std::uint64_t average_from = total_steps / 2 + 1;
    std::vector<double> w_sum(d, 0.0);
    double b_sum = 0.0;
    std::uint64_t averaged = 0;
    std::uint64_t t = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t s = 0; s < n; ++s) {
            ++t;
            const std::size_t i = static_cast<std::size_t>(rng.bounded(n));
            const double z = train.labels[i] == 1 ? 1.0 : -1.0;
            const double eta = config.step_scale / (lambda * static_cast<double>(t));
            double margin = model.b;
            for (std::size_t j = 0; j < d; ++j) margin += model.w[j] * train.features(i, j);
            const double decay = 1.0 - std::min(1.0, eta * lambda);
            for (double& wj : model.w) wj *= decay;
            model.b *= decay;
            if (z * margin < 1.0) {
                for (std::size_t j = 0; j < d; ++j)
                    model.w[j] += eta * z * train.features(i, j);
                model.b += eta * z;
            }
            if (t >= average_from) {
                for (std::size_t j = 0; j < d; ++j) w_sum[j] += model.w[j];
                b_sum += model.b;
                ++averaged;
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) model.w[j] = w_sum[j] / static_cast<double>(averaged);
    model.b = b_sum / static_cast<double>(averaged);
    return model;
}

std::vector<double> weight_ranking(const LinearMarginModel& model) {
    std::vector<double> criterion(model.w.size());
    for (std::size_t k = 0; k < model.w.size(); ++k) criterion[k] = model.w[k] * model.w[k];
    return criterion;
}

std::vector<double> rank_features(const Dataset& train, const RankConfig& config) {
    if (config.criterion == RankCriterion::kSquaredWeight)
        return weight_ranking(fit_linear_margin_model(train, config.linear));
    return gbm_importances(fit_gbm(train, config.gbm));
}

RfeResult rfe(const Dataset& train, const RankConfig& config, std::size_t step,
              std::size_t target_count) {
    const std::size_t d = train.n_features();
    if (step < 1) throw ValidationError("rfe: step must be >= 1");
    if (target_count < 1 || target_count > d)
        throw ValidationError("rfe: target_count outside [1, n_features]");
    return chain_to_result(train, eliminate_to(train, config, step, target_count));
}

RfeResult rfecv(const Dataset& data, const RankConfig& config, std::size_t k,
                const std::vector<std::size_t>& counts_to_evaluate, std::uint64_t seed) {
    const std::size_t d = data.n_features();
    if (counts_to_evaluate.empty()) throw ValidationError("rfecv: no feature counts to evaluate");
    for (std::size_t c : counts_to_evaluate)
        if (c < 1 || c > d) throw ValidationError("rfecv: feature count outside [1, n_features]");

    std::vector<std::size_t> counts = counts_to_evaluate;
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    const std::size_t min_count = counts.front();

    const FoldPlan plan = kfold(data.n_rows(), k, seed, &data.labels);
    std::vector<std::vector<double>> fold_accuracy(k, std::vector<double>(counts.size(), 0.0));

    parallel_for(k, [&](std::size_t fold) {
        std::vector<std::size_t> train_rows;
        for (std::size_t f = 0; f < k; ++f)
            if (f != fold)
                train_rows.insert(train_rows.end(), plan.folds[f].begin(), plan.folds[f].end());
        std::sort(train_rows.begin(), train_rows.end());
        const Dataset fold_train = select_rows(data, train_rows);
        const Dataset fold_test = select_rows(data, plan.folds[fold]);

        const EliminationChain chain = eliminate_to(fold_train, config, 1, min_count);
        for (std::size_t ci = 0; ci < counts.size(); ++ci) {
            const std::vector<std::size_t>& features = chain.survivors_at.at(counts[ci]);
            const Dataset train_view = select_features(fold_train, features);
            const GbmModel model = fit_gbm(train_view, config.gbm);
            const Matrix test_x = fold_test.features.select_cols(features);
            const std::vector<int> pred = predict_label(model, test_x);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < pred.size(); ++i)
                correct += static_cast<std::size_t>(pred[i] == fold_test.labels[i]);
            fold_accuracy[fold][ci] =
                static_cast<double>(correct) / static_cast<double>(pred.size());
        }
    });

    std::map<std::size_t, double> cv_scores;
    for (std::size_t ci = 0; ci < counts.size(); ++ci) {
        double sum = 0.0;
        for (std::size_t fold = 0; fold < k; ++fold) sum += fold_accuracy[fold][ci];
        cv_scores[counts[ci]] = sum / static_cast<double>(k);
    }
    std::size_t selected = counts.front();
    for (std::size_t c : counts)
        if (cv_scores[c] > cv_scores[selected]) selected = c; // ties keep the smaller count

    RfeResult result = rfe(data, config, 1, selected);
    result.cv_scores = std::move(cv_scores);
    return result;
}

const char* criterion_name(RankCriterion criterion) {
    return criterion == RankCriterion::kSquaredWeight ? "squared-weight" : "gb-importance";
}

nlohmann::json rfe_result_to_json(const RfeResult& result,
                                  const std::vector<std::string>& feature_names,
                                  RankCriterion criterion) {
    nlohmann::json doc;
    doc["criterion"] = criterion_name(criterion);
    nlohmann::json ranking = nlohmann::json::array();
    for (std::size_t j : result.ranking) ranking.push_back(feature_names[j]);
    doc["ranking"] = std::move(ranking);
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [count, score] : result.cv_scores) scores[std::to_string(count)] = score;
    doc["cv_scores"] = std::move(scores);
    doc["selected_count"] = result.selected_count;
    doc["selected_features"] = result.selected_features;
    return doc;
}

void write_cv_curve_csv(const RfeResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << "feature_count,cv_score\n";
    for (const auto& [count, score] : result.cv_scores) out << count << ',' << score << '\n';
    if (!out) throw ValidationError("write failed: " + path);
}

} // namespace cvd
