#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparseoracle/features.hpp"
#include "sparseoracle/model.hpp"

namespace sparseoracle {

enum class Criterion { gini, entropy };

inline constexpr int kUnlimitedDepth = -1;

struct HyperParams {
    int n_estimators = 100;
    bool bootstrap = true;
    int max_depth = kUnlimitedDepth;
    int min_samples_leaf = 1;
    int min_samples_split = 2;
    int max_features = kNumFeatures;  // features sampled per split
    Criterion criterion = Criterion::gini;
    std::uint64_t seed = 0;
};

std::string describe(const HyperParams& h);

struct Dataset {
    std::vector<FeatureVector> rows;
    std::vector<FormatId> labels;
    std::vector<std::string> matrix_ids;  // optional provenance

    std::size_t size() const { return rows.size(); }
    void validate() const;
    Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct EvalReport {
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    // confusion[truth][predicted]
    std::array<std::array<index_t, kNumFormats>, kNumFormats> confusion{};
    std::array<double, kNumFormats> per_class_recall{};
    std::array<index_t, kNumFormats> per_class_support{};
};

struct CvResult {
    double mean_accuracy = 0.0;
    double mean_balanced_accuracy = 0.0;
    std::vector<EvalReport> folds;
    bool stratified = true;  // false when a class was too small and the
                             // split fell back to plain round-robin
};

double gini_impurity(const std::array<index_t, kNumFormats>& counts);
double entropy_impurity(const std::array<index_t, kNumFormats>& counts);

// Greedy CART. Candidate thresholds are midpoints between consecutive
// distinct sorted values of each candidate feature; the split minimizing
// weighted child impurity wins, ties to the lowest feature index then the
// lowest threshold. Deterministic given (d, h).
DecisionTreeModel train_tree(const Dataset& d, const HyperParams& h);

// Bootstrap draws |d| samples with replacement per tree from the stream
// (seed, t); each tree gets a derived feature-subsampling seed.
ForestModel train_forest(const Dataset& d, const HyperParams& h);

EvalReport evaluate(const DecisionTreeModel& model, const Dataset& d);
EvalReport evaluate(const ForestModel& model, const Dataset& d);

// Stratified k folds (per-class round-robin after a seeded shuffle); falls
// back to unstratified when a present class has fewer than k members.
CvResult cross_validate(const Dataset& d, const HyperParams& h, int k = 5);

struct HyperGrid {
    std::vector<int> n_estimators = {100};
    std::vector<int> max_depth = {kUnlimitedDepth};
    std::vector<int> min_samples_leaf = {1};
    std::vector<int> min_samples_split = {2};
    std::vector<int> max_features = {kNumFeatures};
    std::vector<Criterion> criterion = {Criterion::gini};
    std::vector<bool> bootstrap = {true};
    std::uint64_t seed = 0;

    // The full tuning space: estimators 20..100 step 10, depth 10..24,
    // min leaf {1,2,3}, min split {2,5,10}, max features 4..10, both
    // criteria, bootstrap on/off.
    static HyperGrid full_space();

    // Cartesian product in canonical ascending order.
    std::vector<HyperParams> points() const;
};

// Lines of 'key = v1,v2,...'; max_depth accepts 'none' for unlimited.
HyperGrid parse_grid_file(const std::filesystem::path& path);

struct GridPointScore {
    HyperParams params;
    CvResult cv;
};

struct GridSearchResult {
    HyperParams best;
    ForestModel model;  // retrained on the full dataset at the winner
    CvResult best_cv;
    std::vector<GridPointScore> scores;
};

// Maximizes mean CV balanced accuracy; ties prefer higher accuracy, then the
// lexicographically smaller point.
GridSearchResult grid_search(const Dataset& d, const HyperGrid& grid,
                             int k = 5);

}  // namespace sparseoracle
