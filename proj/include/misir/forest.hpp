#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace misir {

// The credibility feature vector: smog, pagerank, css_rule_count.
inline constexpr std::size_t kNumForestFeatures = 3;
using FeatureVector = std::array<double, kNumForestFeatures>;

struct ForestHyperparams {
    std::size_t trees = 100;
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_leaf = 1;
};

struct TreeNode {
    // Interior node: feature >= 0, x[feature] <= threshold goes left.
    // Leaf: feature == -1 and vote in {0, 1}.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int vote = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    int predict(const FeatureVector& x) const;
};

/// Bagged decision trees with axis-aligned Gini splits over random feature
/// subsets of size ceil(sqrt(3)) = 2. All randomness flows from the seed
/// (per-tree generators are derived from it), so identical inputs and seed
/// give an identical model; leaf-vote ties go to 0 (non-credible).
class RandomForest {
public:
    // Requires >= 2 samples covering both classes; labels are 0/1.
    static RandomForest train(const std::vector<FeatureVector>& features,
                              const std::vector<int>& labels, const ForestHyperparams& params,
                              std::uint64_t seed);

    // Fraction of trees voting 1, in [0, 1].
    double predict(const FeatureVector& x) const;

    void save(const std::filesystem::path& path) const;  // versioned JSON dump
    static RandomForest load(const std::filesystem::path& path);

    const std::vector<DecisionTree>& trees() const { return trees_; }
    std::uint64_t seed() const { return seed_; }
    const ForestHyperparams& hyperparams() const { return params_; }

private:
    std::vector<DecisionTree> trees_;
    ForestHyperparams params_;
    std::uint64_t seed_ = 0;
};

}  // namespace misir
