#include "cvd/dataset.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cvd/errors.hpp"
#include "cvd/rng.hpp"

namespace cvd {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delim)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

bool parse_cell(const std::string& cell, double& value) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    return ec == std::errc() && ptr == end;
}

bool is_missing_cell(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "na" || cell == "Na";
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

bool implausible_vitals(double ap_hi, double ap_lo) {
    return ap_hi <= 0.0 || ap_hi > 300.0 || ap_lo <= 0.0 || ap_lo > 250.0;
}

} // namespace

std::vector<double> impute_mode(const std::vector<double>& column) {
    std::map<double, std::size_t> counts;
    for (double v : column)
        if (!std::isnan(v)) ++counts[v];
    if (counts.empty()) throw ValidationError("impute_mode: all values missing");
    // std::map iterates keys ascending, so on equal counts the smaller value wins.
    double mode = 0.0;
    std::size_t best = 0;
    for (const auto& [value, count] : counts) {
        if (count > best) {
            best = count;
            mode = value;
        }
    }
    std::vector<double> out = column;
    for (double& v : out)
        if (std::isnan(v)) v = mode;
    return out;
}

Dataset load_csv(const std::string& path, const LoadOptions& opts, LoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw ValidationError("empty dataset: " + path);
    const std::vector<std::string> header = split_line(header_line, opts.delimiter);

    // Map canonical feature -> column position in this file.
    const std::size_t d = kCanonicalFeatures.size();
    std::vector<std::ptrdiff_t> feature_pos(d, -1);
    std::ptrdiff_t target_pos = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = to_lower(header[c]);
        if (name == "id") continue;
        if (name == kTargetColumn) {
            if (target_pos >= 0) throw ValidationError("duplicate target column 'cardio'");
            target_pos = static_cast<std::ptrdiff_t>(c);
            continue;
        }
        bool known = false;
        for (std::size_t j = 0; j < d; ++j) {
            if (name == kCanonicalFeatures[j]) {
                if (feature_pos[j] >= 0)
                    throw ValidationError("duplicate column '" + header[c] + "'");
                feature_pos[j] = static_cast<std::ptrdiff_t>(c);
                known = true;
                break;
            }
        }
        if (!known) throw ValidationError("unknown column '" + header[c] + "'");
    }
    if (target_pos < 0) throw ValidationError("target column 'cardio' missing");
    for (std::size_t j = 0; j < d; ++j)
        if (feature_pos[j] < 0)
            throw ValidationError(std::string("required column '") + kCanonicalFeatures[j] +
                                  "' missing");

    std::vector<std::vector<double>> columns(d);
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 1;
    std::size_t missing_cells = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_line(line, opts.delimiter);
        if (cells.size() != header.size())
            throw ValidationError("malformed row (wrong column count) at line " +
                                  std::to_string(line_no));
        for (std::size_t j = 0; j < d; ++j) {
            const std::string& cell = cells[static_cast<std::size_t>(feature_pos[j])];
            if (is_missing_cell(cell)) {
                columns[j].push_back(kMissing);
                ++missing_cells;
                continue;
            }
            double v;
            if (!parse_cell(cell, v))
                throw ValidationError("non-numeric cell '" + cell + "' at line " +
                                      std::to_string(line_no));
            columns[j].push_back(v);
        }
        const std::string& target_cell = cells[static_cast<std::size_t>(target_pos)];
        if (is_missing_cell(target_cell))
            throw ValidationError("missing target value at line " + std::to_string(line_no));
        double t;
        if (!parse_cell(target_cell, t))
            throw ValidationError("non-numeric target '" + target_cell + "' at line " +
                                  std::to_string(line_no));
        if (t != 0.0 && t != 1.0)
            throw ValidationError("non-binary target at line " + std::to_string(line_no));
        labels.push_back(t == 1.0 ? 1 : 0);
    }
    if (labels.empty()) throw ValidationError("empty dataset: " + path);

    for (std::size_t j = 0; j < d; ++j) {
        bool any_missing = false;
        for (double v : columns[j])
            if (std::isnan(v)) {
                any_missing = true;
                break;
            }
        if (any_missing) columns[j] = impute_mode(columns[j]);
    }

    // Age-unit policy: `auto` treats the column as days when its median
    // exceeds 200; conversion is floor(days / 365.25).
    bool convert_age = opts.age_unit == AgeUnit::kDays;
    if (opts.age_unit == AgeUnit::kAuto) convert_age = median_of(columns[0]) > 200.0;
    if (convert_age)
        for (double& v : columns[0]) v = std::floor(v / 365.25);

    std::size_t filtered = 0;
    std::vector<std::size_t> keep;
    keep.reserve(labels.size());
    for (std::size_t r = 0; r < labels.size(); ++r) {
        if (opts.filter_implausible_vitals && implausible_vitals(columns[4][r], columns[5][r])) {
            ++filtered;
            continue;
        }
        keep.push_back(r);
    }
    if (keep.empty()) throw ValidationError("empty dataset after plausibility filter");

    Dataset ds;
    ds.feature_names.assign(kCanonicalFeatures.begin(), kCanonicalFeatures.end());
    ds.features = Matrix(keep.size(), d);
    ds.labels.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = columns[j][keep[i]];
        ds.labels.push_back(labels[keep[i]]);
    }
    if (stats) {
        stats->imputed_cells = missing_cells;
        stats->filtered_rows = filtered;
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
        if (j) out << ',';
        out << ds.feature_names[j];
    }
    out << ',' << kTargetColumn << '\n';
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        for (std::size_t j = 0; j < ds.n_features(); ++j) {
            if (j) out << ',';
            out << format_double(ds.features(r, j));
        }
        out << ',' << ds.labels[r] << '\n';
    }
    if (!out) throw ValidationError("write failed: " + path);
}

ScalingParams fit_scaling(const Dataset& ds, std::span<const std::size_t> rows) {
    if (rows.empty()) throw ValidationError("fit_scaling: empty training view");
    ScalingParams p;
    const std::size_t d = ds.n_features();
    p.min.assign(d, std::numeric_limits<double>::infinity());
    p.max.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = ds.features(r, j);
            p.min[j] = std::min(p.min[j], v);
            p.max[j] = std::max(p.max[j], v);
        }
    }
    return p;
}

ScalingParams fit_scaling(const Dataset& ds) {
    std::vector<std::size_t> all(ds.n_rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return fit_scaling(ds, all);
}

Dataset apply_scaling(const Dataset& ds, const ScalingParams& params) {
    if (params.min.size() != ds.n_features() || params.max.size() != ds.n_features())
        throw ValidationError("apply_scaling: column-count mismatch");
    Dataset out = ds;
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        const double lo = params.min[j];
        const double range = params.max[j] - lo;
        for (std::size_t r = 0; r < ds.n_rows(); ++r)
            out.features(r, j) = range == 0.0 ? 0.0 : (ds.features(r, j) - lo) / range;
    }
    return out;
}

namespace {

// Per-class train counts: floor(n_c * fraction) plus largest-remainder top-up
// until the global train size is met. Keeps every class within one row of the
// global fraction.
std::vector<std::size_t> stratified_train_counts(const std::vector<std::size_t>& class_sizes,
                                                 double fraction, std::size_t train_size) {
    const std::size_t k = class_sizes.size();
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, std::size_t>> remainders; // (-remainder, class)
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = static_cast<double>(class_sizes[c]) * fraction;
        counts[c] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[c];
        remainders.push_back({-(exact - std::floor(exact)), c});
    }
    std::sort(remainders.begin(), remainders.end());
    std::size_t i = 0;
    while (assigned < train_size && i < remainders.size()) {
        const std::size_t c = remainders[i++].second;
        if (counts[c] < class_sizes[c]) {
            ++counts[c];
            ++assigned;
        }
    }
    return counts;
}

} // namespace

SplitIndices train_test_split(std::size_t n, double train_fraction, std::uint64_t seed,
                              const std::vector<int>* stratify_labels) {
    if (n < 2) throw ValidationError("train_test_split: need at least 2 rows");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("train_test_split: fraction outside (0,1)");
    if (stratify_labels && stratify_labels->size() != n)
        throw ValidationError("train_test_split: stratify label length mismatch");

    std::size_t train_size =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
    train_size = std::clamp<std::size_t>(train_size, 1, n - 1);

    Rng rng(seed);
    SplitIndices split;
    if (!stratify_labels) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(idx);
        split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_size));
        split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(train_size), idx.end());
    } else {
        std::vector<std::size_t> class0, class1;
        for (std::size_t i = 0; i < n; ++i)
            ((*stratify_labels)[i] == 0 ? class0 : class1).push_back(i);
        if (class0.empty() || class1.empty())
            throw ValidationError("train_test_split: stratified split needs both classes");
        rng.shuffle(class0);
        rng.shuffle(class1);
        const std::vector<std::size_t> counts =
            stratified_train_counts({class0.size(), class1.size()}, train_fraction, train_size);
        const std::vector<std::vector<std::size_t>*> classes = {&class0, &class1};
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const auto& members = *classes[c];
            for (std::size_t i = 0; i < members.size(); ++i)
                (i < counts[c] ? split.train : split.test).push_back(members[i]);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    if (split.train.empty() || split.test.empty())
        throw ValidationError("train_test_split: degenerate split");
    return split;
}

FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed,
               const std::vector<int>* stratify_labels) {
    if (k < 2) throw ValidationError("kfold: k must be at least 2");
    if (k > n) throw ValidationError("kfold: k exceeds row count");
    if (stratify_labels && stratify_labels->size() != n)
        throw ValidationError("kfold: stratify label length mismatch");

    Rng rng(seed);
    FoldPlan plan;
    plan.folds.assign(k, {});
    if (!stratify_labels) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(idx);
        for (std::size_t i = 0; i < n; ++i) plan.folds[i % k].push_back(idx[i]);
    } else {
        // Deal each class round-robin, carrying the fold cursor across classes
        // so global fold sizes stay within one of each other.
        std::vector<std::size_t> class0, class1;
        for (std::size_t i = 0; i < n; ++i)
            ((*stratify_labels)[i] == 0 ? class0 : class1).push_back(i);
        rng.shuffle(class0);
        rng.shuffle(class1);
        std::size_t cursor = 0;
        for (const auto* members : {&class0, &class1})
            for (std::size_t i = 0; i < members->size(); ++i)
                plan.folds[cursor++ % k].push_back((*members)[i]);
    }
    for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
    return plan;
}

Dataset select_rows(const Dataset& ds, std::span<const std::size_t> rows) {
    Dataset out;
    out.feature_names = ds.feature_names;
    out.features = ds.features.select_rows(rows);
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(ds.labels[r]);
    return out;
}

Dataset select_features(const Dataset& ds, std::span<const std::size_t> feature_idx) {
    Dataset out;
    out.features = ds.features.select_cols(feature_idx);
    out.labels = ds.labels;
    out.feature_names.reserve(feature_idx.size());
    for (std::size_t j : feature_idx) out.feature_names.push_back(ds.feature_names[j]);
    return out;
}

} // namespace cvd
