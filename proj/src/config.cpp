#include "cvd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cvd/errors.hpp"

namespace cvd {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    double v;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ValidationError("config: bad numeric value for " + key + ": '" + value + "'");
    return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
    std::uint64_t v;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ValidationError("config: bad integer value for " + key + ": '" + value + "'");
    return v;
}

std::uint64_t parse_count_min(const std::string& key, const std::string& value,
                              std::uint64_t minimum) {
    const std::uint64_t v = parse_count(key, value);
    if (v < minimum)
        throw ValidationError("config: " + key + " must be >= " + std::to_string(minimum));
    return v;
}

double parse_double_in(const std::string& key, const std::string& value, double lo, double hi,
                       bool open_lo, bool open_hi) {
    const double v = parse_double(key, value);
    const bool above = open_lo ? v > lo : v >= lo;
    const bool below = open_hi ? v < hi : v <= hi;
    if (!above || !below) throw ValidationError("config: " + key + " out of range");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError("config: bad boolean value for " + key + ": '" + value + "'");
}

// Counts accept a comma list ("1,2,5") and/or ranges ("1..11"); "auto" means
// every count from 1 to the feature total.
std::vector<std::size_t> parse_counts(const std::string& key, const std::string& value) {
    if (value == "auto") return {};
    std::vector<std::size_t> counts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const std::size_t dots = item.find("..");
        if (dots != std::string::npos) {
            const std::size_t lo = parse_count(key, item.substr(0, dots));
            const std::size_t hi = parse_count(key, item.substr(dots + 2));
            if (lo < 1 || hi < lo)
                throw ValidationError("config: bad range for " + key + ": '" + item + "'");
            for (std::size_t c = lo; c <= hi; ++c) counts.push_back(c);
        } else {
            counts.push_back(parse_count_min(key, item, 1));
        }
    }
    if (counts.empty()) throw ValidationError("config: empty count list for " + key);
    return counts;
}

std::string counts_to_string(const std::vector<std::size_t>& counts) {
    if (counts.empty()) return "auto";
    std::string out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(counts[i]);
    }
    return out;
}

std::string format_double_echo(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

// Validation happens before assignment, so a rejected override leaves the
// config untouched.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "input") {
        config.input = value;
    } else if (key == "output_dir") {
        config.output_dir = value;
    } else if (key == "seed") {
        config.seed = parse_count(key, value);
    } else if (key == "split.train_fraction") {
        config.train_fraction = parse_double_in(key, value, 0.0, 1.0, true, true);
    } else if (key == "split.stratified") {
        config.stratified = parse_bool(key, value);
    } else if (key == "split.kfold_k") {
        config.kfold_k = parse_count_min(key, value, 2);
    } else if (key == "csv.delimiter") {
        if (value != ";" && value != ",")
            throw ValidationError("config: csv.delimiter must be ';' or ','");
        config.delimiter = value[0];
    } else if (key == "csv.age_unit") {
        if (value == "days")
            config.age_unit = AgeUnit::kDays;
        else if (value == "years")
            config.age_unit = AgeUnit::kYears;
        else if (value == "auto")
            config.age_unit = AgeUnit::kAuto;
        else
            throw ValidationError("config: csv.age_unit must be days, years or auto");
    } else if (key == "csv.filter_implausible_vitals") {
        config.filter_implausible_vitals = parse_bool(key, value);
    } else if (key == "metrics.mse_mode") {
        if (value == "label")
            config.mse_mode = MseMode::kLabel;
        else if (value == "probability")
            config.mse_mode = MseMode::kProbability;
        else
            throw ValidationError("config: metrics.mse_mode must be label or probability");
    } else if (key == "metrics.label_threshold") {
        config.label_threshold = parse_double_in(key, value, 0.0, 1.0, true, true);
    } else if (key == "gbm.n_stages") {
        config.gbm.n_stages = parse_count_min(key, value, 1);
    } else if (key == "gbm.learning_rate") {
        config.gbm.learning_rate = parse_double_in(key, value, 0.0, 1.0, true, false);
    } else if (key == "tree.max_depth") {
        config.gbm.tree.max_depth = parse_count(key, value);
    } else if (key == "tree.min_samples_split") {
        config.gbm.tree.min_samples_split = parse_count_min(key, value, 2);
    } else if (key == "tree.min_samples_leaf") {
        config.gbm.tree.min_samples_leaf = parse_count_min(key, value, 1);
    } else if (key == "baseline.knn_k") {
        config.knn_k = parse_count_min(key, value, 1);
    } else if (key == "baseline.lda_shrinkage") {
        const double v = parse_double(key, value);
        if (v < 0.0) throw ValidationError("config: baseline.lda_shrinkage must be >= 0");
        config.lda_shrinkage = v;
    } else if (key == "baseline.use_selected_features") {
        config.baselines_use_selected = parse_bool(key, value);
    } else if (key == "rfe.criterion") {
        if (value == "gb-importance")
            config.rfe_criterion = RankCriterion::kGbImportance;
        else if (value == "squared-weight")
            config.rfe_criterion = RankCriterion::kSquaredWeight;
        else
            throw ValidationError("config: rfe.criterion must be gb-importance or squared-weight");
    } else if (key == "rfe.step") {
        config.rfe_step = parse_count_min(key, value, 1);
    } else if (key == "rfe.counts") {
        config.rfe_counts = parse_counts(key, value);
    } else if (key == "rfe.kfold_k") {
        config.rfe_kfold_k = parse_count_min(key, value, 2);
    } else if (key == "linear.regularization") {
        const double v = parse_double(key, value);
        if (!(v > 0.0)) throw ValidationError("config: linear.regularization must be > 0");
        config.linear.regularization = v;
    } else if (key == "linear.epochs") {
        config.linear.epochs = parse_count_min(key, value, 1);
    } else if (key == "linear.step_scale") {
        const double v = parse_double(key, value);
        if (!(v > 0.0)) throw ValidationError("config: linear.step_scale must be > 0");
        config.linear.step_scale = v;
    } else if (key == "train.use_rfe") {
        config.train_use_rfe = parse_bool(key, value);
    } else {
        throw ValidationError("config: unknown key '" + key + "'");
    }
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config: missing '=' at line " + std::to_string(line_no));
        apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

void validate_config(const RunConfig& config) {
    if (config.input.empty()) throw ValidationError("config: input path is required");
}

std::string config_echo(const RunConfig& config) {
    std::ostringstream out;
    out << "baseline.knn_k = " << config.knn_k << '\n'
        << "baseline.lda_shrinkage = " << format_double_echo(config.lda_shrinkage) << '\n'
        << "baseline.use_selected_features = "
        << (config.baselines_use_selected ? "true" : "false") << '\n'
        << "csv.age_unit = "
        << (config.age_unit == AgeUnit::kDays
                ? "days"
                : config.age_unit == AgeUnit::kYears ? "years" : "auto")
        << '\n'
        << "csv.delimiter = " << config.delimiter << '\n'
        << "csv.filter_implausible_vitals = "
        << (config.filter_implausible_vitals ? "true" : "false") << '\n'
        << "gbm.learning_rate = " << format_double_echo(config.gbm.learning_rate) << '\n'
        << "gbm.n_stages = " << config.gbm.n_stages << '\n'
        << "input = " << config.input << '\n'
        << "linear.epochs = " << config.linear.epochs << '\n'
        << "linear.regularization = " << format_double_echo(config.linear.regularization) << '\n'
        << "linear.step_scale = " << format_double_echo(config.linear.step_scale) << '\n'
        << "metrics.label_threshold = " << format_double_echo(config.label_threshold) << '\n'
        << "metrics.mse_mode = " << (config.mse_mode == MseMode::kLabel ? "label" : "probability")
        << '\n'
        << "output_dir = " << config.output_dir << '\n'
        << "rfe.counts = " << counts_to_string(config.rfe_counts) << '\n'
        << "rfe.criterion = " << criterion_name(config.rfe_criterion) << '\n'
        << "rfe.kfold_k = " << config.rfe_kfold_k << '\n'
        << "rfe.step = " << config.rfe_step << '\n'
        << "seed = " << config.seed << '\n'
        << "split.kfold_k = " << config.kfold_k << '\n'
        << "split.stratified = " << (config.stratified ? "true" : "false") << '\n'
        << "split.train_fraction = " << format_double_echo(config.train_fraction) << '\n'
        << "train.use_rfe = " << (config.train_use_rfe ? "true" : "false") << '\n'
        << "tree.max_depth = " << config.gbm.tree.max_depth << '\n'
        << "tree.min_samples_leaf = " << config.gbm.tree.min_samples_leaf << '\n'
        << "tree.min_samples_split = " << config.gbm.tree.min_samples_split << '\n';
    return out.str();
}

RankConfig make_rank_config(const RunConfig& config) {
    RankConfig rank;
    rank.criterion = config.rfe_criterion;
    rank.linear = config.linear;
    rank.linear.seed = config.seed;
    rank.gbm = config.gbm;
    rank.gbm.seed = config.seed;
    return rank;
}

} // namespace cvd
