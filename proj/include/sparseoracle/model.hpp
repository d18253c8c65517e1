#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sparseoracle/features.hpp"
#include "sparseoracle/formats.hpp"

namespace sparseoracle {

// Nodes live in a flat array; node 0 is the root and children are indices.
// feature_index == kLeaf marks a leaf. class_counts is the training-sample
// histogram at the node; predicted_class its argmax with ties to the lowest
// format ID.
struct TreeNode {
    static constexpr int kLeaf = -1;

    int feature_index = kLeaf;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<index_t, kNumFormats> class_counts{};
    int predicted_class = 0;

    bool is_leaf() const { return feature_index == kLeaf; }
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes;
    int depth = 0;  // longest root-to-leaf path, in edges

    const TreeNode& root() const { return nodes.front(); }
};

enum class ModelKind { tree, forest };

struct ForestModel {
    std::vector<DecisionTreeModel> trees;
    ModelKind kind = ModelKind::forest;
    // Training provenance (backend label, hyperparameters, dataset hash).
    std::vector<std::pair<std::string, std::string>> metadata;

    int n_estimators() const { return static_cast<int>(trees.size()); }
};

// Walks from the root: x[feature_index] <= threshold goes left.
FormatId predict_tree(const DecisionTreeModel& t, const FeatureVector& x);

// Majority vote over the trees; ties break to the lowest FormatId.
FormatId predict_forest(const ForestModel& f, const FeatureVector& x);

// Line-oriented text format, UTF-8 with LF endings:
//
//   sparse-oracle-model v1
//   kind: forest            (or: tree)
//   n_features: 10
//   n_classes: 6
//   n_trees: <T>
//   # key=value             (metadata, zero or more lines)
//   tree <t> nodes <K>      (then K node lines, node 0 is the root)
//   <id> <feature|-1> <threshold|0> <left|-1> <right|-1> <class|-1> <c0> ... <c5>
//
// Thresholds use shortest round-trip decimals, so saving the same model twice
// is byte-identical and load(save(f)) preserves every prediction.
void save_model(const ForestModel& f, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

// Single-tree file with kind: tree.
void save_model(const DecisionTreeModel& t, const std::filesystem::path& path,
                std::vector<std::pair<std::string, std::string>> metadata = {});

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace sparseoracle
