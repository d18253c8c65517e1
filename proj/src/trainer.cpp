#include "sparseoracle/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sparseoracle/rng.hpp"

namespace sparseoracle {

namespace {

constexpr std::uint64_t kFoldStream = 0xF01D;

using Row = std::array<double, kNumFeatures>;

int argmax_tie_low(const std::array<index_t, kNumFormats>& counts) {
    int best = 0;
    for (int c = 1; c < kNumFormats; ++c) {
        if (counts[static_cast<std::size_t>(c)] >
            counts[static_cast<std::size_t>(best)]) {
            best = c;
        }
    }
    return best;
}

double impurity(const std::array<index_t, kNumFormats>& counts,
                Criterion criterion) {
    return criterion == Criterion::gini ? gini_impurity(counts)
                                        : entropy_impurity(counts);
}

struct SplitChoice {
    bool found = false;
    double score = 0.0;
    int feature = 0;
    double threshold = 0.0;
};

struct TreeBuilder {
    const std::vector<Row>& x;
    const std::vector<int>& y;
    const HyperParams& h;
    Rng rng;
    std::vector<TreeNode> nodes;
    int depth_seen = 0;

    TreeBuilder(const std::vector<Row>& x, const std::vector<int>& y,
                const HyperParams& h)
        : x(x), y(y), h(h), rng(h.seed) {}

    std::vector<int> candidate_features() {
        std::vector<int> all(kNumFeatures);
        for (int f = 0; f < kNumFeatures; ++f) all[static_cast<std::size_t>(f)] = f;
        if (h.max_features >= kNumFeatures) return all;
        // Partial Fisher-Yates, then ascending so equal-impurity ties land on
        // the lowest feature index.
        for (int i = 0; i < h.max_features; ++i) {
            std::size_t j = static_cast<std::size_t>(i) +
                            rng.uniform_index(all.size() - static_cast<std::size_t>(i));
            std::swap(all[static_cast<std::size_t>(i)], all[j]);
        }
        all.resize(static_cast<std::size_t>(h.max_features));
        std::sort(all.begin(), all.end());
        return all;
    }

    SplitChoice best_split(const std::vector<int>& indices) {
        std::size_t n = indices.size();
        SplitChoice best;
        std::vector<std::pair<double, int>> ordered(n);
        for (int f : candidate_features()) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t s = static_cast<std::size_t>(indices[i]);
                ordered[i] = {x[s][static_cast<std::size_t>(f)], y[s]};
            }
            std::sort(ordered.begin(), ordered.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::array<index_t, kNumFormats> left{};
            std::array<index_t, kNumFormats> right{};
            for (std::size_t i = 0; i < n; ++i) {
                right[static_cast<std::size_t>(ordered[i].second)]++;
            }
            index_t nl = 0;
            index_t nr = static_cast<index_t>(n);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left[static_cast<std::size_t>(ordered[i].second)]++;
                right[static_cast<std::size_t>(ordered[i].second)]--;
                ++nl;
                --nr;
                if (ordered[i].first == ordered[i + 1].first) continue;
                if (nl < h.min_samples_leaf || nr < h.min_samples_leaf) continue;
                double score = (static_cast<double>(nl) * impurity(left, h.criterion) +
                                static_cast<double>(nr) * impurity(right, h.criterion)) /
                               static_cast<double>(n);
                if (!best.found || score < best.score) {
                    double lo = ordered[i].first;
                    double hi = ordered[i + 1].first;
                    double thr = (lo + hi) / 2.0;
                    if (!(thr < hi)) thr = lo;  // midpoint rounded up to hi
                    best = {true, score, f, thr};
                }
            }
        }
        return best;
    }

    int build(std::vector<int> indices, int depth) {
        std::array<index_t, kNumFormats> counts{};
        for (int s : indices) counts[static_cast<std::size_t>(y[static_cast<std::size_t>(s)])]++;

        int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(id)].class_counts = counts;
        nodes[static_cast<std::size_t>(id)].predicted_class = argmax_tie_low(counts);
        depth_seen = std::max(depth_seen, depth);

        bool pure = std::count_if(counts.begin(), counts.end(),
                                  [](index_t c) { return c > 0; }) <= 1;
        bool depth_capped = h.max_depth != kUnlimitedDepth && depth >= h.max_depth;
        if (pure || depth_capped ||
            static_cast<int>(indices.size()) < h.min_samples_split) {
            return id;
        }

        SplitChoice split = best_split(indices);
        if (!split.found) return id;

        std::vector<int> left_idx, right_idx;
        for (int s : indices) {
            const double v = x[static_cast<std::size_t>(s)]
                              [static_cast<std::size_t>(split.feature)];
            (v <= split.threshold ? left_idx : right_idx).push_back(s);
        }
        indices.clear();
        indices.shrink_to_fit();

        nodes[static_cast<std::size_t>(id)].feature_index = split.feature;
        nodes[static_cast<std::size_t>(id)].threshold = split.threshold;
        int left = build(std::move(left_idx), depth + 1);
        int right = build(std::move(right_idx), depth + 1);
        nodes[static_cast<std::size_t>(id)].left = left;
        nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    }
};

template <typename Predictor>
EvalReport evaluate_with(const Predictor& predict, const Dataset& d) {
    d.validate();
    EvalReport report;
    for (std::size_t i = 0; i < d.size(); ++i) {
        int truth = static_cast<int>(d.labels[i]);
        int pred = static_cast<int>(predict(d.rows[i]));
        report.confusion[static_cast<std::size_t>(truth)]
                        [static_cast<std::size_t>(pred)]++;
        report.per_class_support[static_cast<std::size_t>(truth)]++;
    }
    index_t correct = 0;
    int present = 0;
    double recall_sum = 0.0;
    for (int c = 0; c < kNumFormats; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        correct += report.confusion[ci][ci];
        if (report.per_class_support[ci] > 0) {
            report.per_class_recall[ci] =
                static_cast<double>(report.confusion[ci][ci]) /
                static_cast<double>(report.per_class_support[ci]);
            recall_sum += report.per_class_recall[ci];
            ++present;
        }
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(d.size());
    report.balanced_accuracy = recall_sum / static_cast<double>(present);
    return report;
}

// Folds are index lists; fold_of[i] == -1 never happens.
std::vector<int> assign_folds(const Dataset& d, const HyperParams& h, int k,
                              bool* stratified_out) {
    std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(h.seed, kFoldStream));
    rng.shuffle(order);

    std::array<index_t, kNumFormats> class_counts{};
    for (FormatId label : d.labels) {
        class_counts[static_cast<std::size_t>(label)]++;
    }
    bool stratified = true;
    for (index_t c : class_counts) {
        if (c > 0 && c < k) stratified = false;
    }
    *stratified_out = stratified;

    std::vector<int> fold_of(n, 0);
    if (stratified) {
        std::array<int, kNumFormats> next{};
        for (std::size_t i : order) {
            const std::size_t cls = static_cast<std::size_t>(d.labels[i]);
            fold_of[i] = next[cls]++ % k;
        }
    } else {
        for (std::size_t pos = 0; pos < n; ++pos) {
            fold_of[order[pos]] = static_cast<int>(pos) % k;
        }
    }
    return fold_of;
}

bool lexicographically_before(const HyperParams& a, const HyperParams& b) {
    auto key = [](const HyperParams& h) {
        return std::make_tuple(
            h.n_estimators,
            h.max_depth == kUnlimitedDepth ? std::numeric_limits<int>::max()
                                           : h.max_depth,
            h.min_samples_leaf, h.min_samples_split, h.max_features,
            static_cast<int>(h.criterion), h.bootstrap ? 1 : 0);
    };
    return key(a) < key(b);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream ss(s);
    while (std::getline(ss, tok, ',')) {
        std::size_t b = tok.find_first_not_of(" \t");
        std::size_t e = tok.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? "" : tok.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

std::string describe(const HyperParams& h) {
    std::ostringstream out;
    out << "estimators=" << h.n_estimators
        << " bootstrap=" << (h.bootstrap ? "true" : "false") << " max_depth=";
    if (h.max_depth == kUnlimitedDepth) {
        out << "none";
    } else {
        out << h.max_depth;
    }
    out << " min_samples_leaf=" << h.min_samples_leaf
        << " min_samples_split=" << h.min_samples_split
        << " max_features=" << h.max_features << " criterion="
        << (h.criterion == Criterion::gini ? "gini" : "entropy");
    return out.str();
}

void Dataset::validate() const {
    if (rows.empty()) throw EmptyDataset("dataset has no rows");
    if (labels.size() != rows.size()) {
        throw InvalidInput("dataset rows and labels differ in length");
    }
    if (!matrix_ids.empty() && matrix_ids.size() != rows.size()) {
        throw InvalidInput("dataset matrix_ids length mismatch");
    }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.rows.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        out.rows.push_back(rows[i]);
        out.labels.push_back(labels[i]);
        if (!matrix_ids.empty()) out.matrix_ids.push_back(matrix_ids[i]);
    }
    return out;
}

double gini_impurity(const std::array<index_t, kNumFormats>& counts) {
    index_t n = 0;
    for (index_t c : counts) n += c;
    if (n == 0) return 0.0;
    double sum_sq = 0.0;
    for (index_t c : counts) {
        double p = static_cast<double>(c) / static_cast<double>(n);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

double entropy_impurity(const std::array<index_t, kNumFormats>& counts) {
    index_t n = 0;
    for (index_t c : counts) n += c;
    if (n == 0) return 0.0;
    double e = 0.0;
    for (index_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(n);
        e -= p * std::log2(p);
    }
    return e;
}

DecisionTreeModel train_tree(const Dataset& d, const HyperParams& h) {
    d.validate();
    std::vector<Row> x(d.size());
    std::vector<int> y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        x[i] = features_to_row(d.rows[i]);
        y[i] = static_cast<int>(d.labels[i]);
    }
    std::vector<int> all(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) all[i] = static_cast<int>(i);

    TreeBuilder builder(x, y, h);
    builder.build(std::move(all), 0);

    DecisionTreeModel model;
    model.nodes = std::move(builder.nodes);
    model.depth = builder.depth_seen;
    return model;
}

ForestModel train_forest(const Dataset& d, const HyperParams& h) {
    d.validate();
    if (h.n_estimators < 1) {
        throw InvalidInput("train_forest: n_estimators must be >= 1");
    }
    ForestModel forest;
    forest.trees.reserve(static_cast<std::size_t>(h.n_estimators));
    for (int t = 0; t < h.n_estimators; ++t) {
        HyperParams tree_params = h;
        tree_params.seed = derive_seed(h.seed, 2 * static_cast<std::uint64_t>(t) + 1);
        if (h.bootstrap) {
            Rng draw(derive_seed(h.seed, 2 * static_cast<std::uint64_t>(t)));
            std::vector<std::size_t> picks(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) {
                picks[i] = draw.uniform_index(d.size());
            }
            forest.trees.push_back(train_tree(d.subset(picks), tree_params));
        } else {
            forest.trees.push_back(train_tree(d, tree_params));
        }
    }
    return forest;
}

EvalReport evaluate(const DecisionTreeModel& model, const Dataset& d) {
    return evaluate_with(
        [&](const FeatureVector& f) { return predict_tree(model, f); }, d);
}

EvalReport evaluate(const ForestModel& model, const Dataset& d) {
    return evaluate_with(
        [&](const FeatureVector& f) { return predict_forest(model, f); }, d);
}

CvResult cross_validate(const Dataset& d, const HyperParams& h, int k) {
    d.validate();
    if (k < 2) throw InvalidInput("cross_validate: k must be >= 2");
    if (d.size() < static_cast<std::size_t>(k)) {
        throw TooFewSamples("cross_validate: dataset smaller than fold count");
    }

    CvResult result;
    std::vector<int> fold_of = assign_folds(d, h, k, &result.stratified);

    for (int fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train_idx, val_idx;
        for (std::size_t i = 0; i < d.size(); ++i) {
            (fold_of[i] == fold ? val_idx : train_idx).push_back(i);
        }
        ForestModel model = train_forest(d.subset(train_idx), h);
        EvalReport report = evaluate(model, d.subset(val_idx));
        result.mean_accuracy += report.accuracy;
        result.mean_balanced_accuracy += report.balanced_accuracy;
        result.folds.push_back(std::move(report));
    }
    result.mean_accuracy /= static_cast<double>(k);
    result.mean_balanced_accuracy /= static_cast<double>(k);
    return result;
}

HyperGrid HyperGrid::full_space() {
    HyperGrid grid;
    grid.n_estimators = {20, 30, 40, 50, 60, 70, 80, 90, 100};
    grid.max_depth.clear();
    for (int depth = 10; depth <= 24; ++depth) grid.max_depth.push_back(depth);
    grid.min_samples_leaf = {1, 2, 3};
    grid.min_samples_split = {2, 5, 10};
    grid.max_features = {4, 5, 6, 7, 8, 9, 10};
    grid.criterion = {Criterion::gini, Criterion::entropy};
    grid.bootstrap = {false, true};
    return grid;
}

std::vector<HyperParams> HyperGrid::points() const {
    auto sorted_unique = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    std::vector<int> est = sorted_unique(n_estimators);
    std::vector<int> depth = sorted_unique(max_depth);
    std::vector<int> leaf = sorted_unique(min_samples_leaf);
    std::vector<int> split = sorted_unique(min_samples_split);
    std::vector<int> feats = sorted_unique(max_features);
    // Unlimited depth sorts last.
    std::stable_partition(depth.begin(), depth.end(),
                          [](int v) { return v != kUnlimitedDepth; });

    std::vector<Criterion> crit = criterion;
    std::sort(crit.begin(), crit.end());
    crit.erase(std::unique(crit.begin(), crit.end()), crit.end());
    std::vector<bool> boot = bootstrap;
    std::sort(boot.begin(), boot.end());
    boot.erase(std::unique(boot.begin(), boot.end()), boot.end());

    std::vector<HyperParams> out;
    for (int e : est)
        for (int dep : depth)
            for (int l : leaf)
                for (int s : split)
                    for (int f : feats)
                        for (Criterion c : crit)
                            for (bool b : boot) {
                                HyperParams h;
                                h.n_estimators = e;
                                h.max_depth = dep;
                                h.min_samples_leaf = l;
                                h.min_samples_split = s;
                                h.max_features = f;
                                h.criterion = c;
                                h.bootstrap = b;
                                h.seed = seed;
                                out.push_back(h);
                            }
    return out;
}

HyperGrid parse_grid_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grid file " + path.string());

    HyperGrid grid;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": expected 'key = values'");
        }
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        key.erase(0, key.find_first_not_of(" \t"));
        std::vector<std::string> values = split_list(line.substr(eq + 1));
        if (values.empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": empty value list");
        }

        auto ints = [&](std::vector<int>& dst) {
            dst.clear();
            for (const std::string& v : values) dst.push_back(std::stoi(v));
        };
        try {
            if (key == "n_estimators") {
                ints(grid.n_estimators);
            } else if (key == "max_depth") {
                grid.max_depth.clear();
                for (const std::string& v : values) {
                    grid.max_depth.push_back(v == "none" ? kUnlimitedDepth
                                                         : std::stoi(v));
                }
            } else if (key == "min_samples_leaf") {
                ints(grid.min_samples_leaf);
            } else if (key == "min_samples_split") {
                ints(grid.min_samples_split);
            } else if (key == "max_features") {
                ints(grid.max_features);
            } else if (key == "criterion") {
                grid.criterion.clear();
                for (const std::string& v : values) {
                    if (v == "gini") {
                        grid.criterion.push_back(Criterion::gini);
                    } else if (v == "entropy") {
                        grid.criterion.push_back(Criterion::entropy);
                    } else {
                        throw ParseError("line " + std::to_string(line_no) +
                                         ": unknown criterion '" + v + "'");
                    }
                }
            } else if (key == "bootstrap") {
                grid.bootstrap.clear();
                for (const std::string& v : values) {
                    if (v == "true" || v == "T" || v == "1") {
                        grid.bootstrap.push_back(true);
                    } else if (v == "false" || v == "F" || v == "0") {
                        grid.bootstrap.push_back(false);
                    } else {
                        throw ParseError("line " + std::to_string(line_no) +
                                         ": bootstrap value '" + v + "'");
                    }
                }
            } else if (key == "seed") {
                grid.seed = std::stoull(values.front());
            } else {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": unknown hyperparameter '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("line " + std::to_string(line_no) +
                             ": invalid number");
        }
    }
    return grid;
}

GridSearchResult grid_search(const Dataset& d, const HyperGrid& grid, int k) {
    std::vector<HyperParams> points = grid.points();
    if (points.empty()) throw InvalidInput("grid_search: empty lattice");

    GridSearchResult result;
    bool have_best = false;
    for (const HyperParams& p : points) {
        CvResult cv = cross_validate(d, p, k);
        bool better = false;
        if (!have_best) {
            better = true;
        } else if (cv.mean_balanced_accuracy != result.best_cv.mean_balanced_accuracy) {
            better = cv.mean_balanced_accuracy > result.best_cv.mean_balanced_accuracy;
        } else if (cv.mean_accuracy != result.best_cv.mean_accuracy) {
            better = cv.mean_accuracy > result.best_cv.mean_accuracy;
        } else {
            better = lexicographically_before(p, result.best);
        }
        if (better) {
            result.best = p;
            result.best_cv = cv;
            have_best = true;
        }
        result.scores.push_back({p, std::move(cv)});
    }
    result.model = train_forest(d, result.best);
    return result;
}

}  // namespace sparseoracle
