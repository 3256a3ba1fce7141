#include "misir/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace misir {

namespace {

using nlohmann::json;

constexpr const char* kForestFormat = "misir-forest";
constexpr int kForestVersion = 1;
constexpr std::size_t kFeatureSubset = 2;  // ceil(sqrt(3))

// splitmix64; decorrelates the per-tree seeds derived from the master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Bounded draw from raw engine output; modulo bias is irrelevant here and
// the result is identical on every platform, unlike the std distributions.
std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

struct TreeBuilder {
    const std::vector<FeatureVector>& features;
    const std::vector<int>& labels;
    const ForestHyperparams& params;
    std::mt19937_64 rng;
    std::vector<TreeNode> nodes;

    int majority(const std::vector<std::size_t>& idx) const {
        std::size_t ones = 0;
        for (std::size_t i : idx) ones += static_cast<std::size_t>(labels[i]);
        return 2 * ones > idx.size() ? 1 : 0;  // tie -> 0
    }

    static double gini(std::size_t ones, std::size_t total) {
        if (total == 0) return 0.0;
        const double p = static_cast<double>(ones) / static_cast<double>(total);
        return 2.0 * p * (1.0 - p);
    }

    int make_leaf(const std::vector<std::size_t>& idx) {
        TreeNode node;
        node.vote = majority(idx);
        nodes.push_back(node);
        return static_cast<int>(nodes.size() - 1);
    }

    int grow(const std::vector<std::size_t>& idx, std::size_t depth) {
        bool pure = true;
        for (std::size_t i : idx) {
            if (labels[i] != labels[idx.front()]) {
                pure = false;
                break;
            }
        }
        if (pure || idx.size() < 2 * params.min_leaf || idx.size() < 2 ||
            (params.max_depth > 0 && depth >= params.max_depth)) {
            return make_leaf(idx);
        }

        // Random feature subset via a partial Fisher-Yates shuffle.
        std::array<std::size_t, kNumForestFeatures> feature_order{};
        for (std::size_t i = 0; i < kNumForestFeatures; ++i) feature_order[i] = i;
        for (std::size_t i = 0; i < kFeatureSubset; ++i) {
            std::size_t j = i + draw_below(rng, kNumForestFeatures - i);
            std::swap(feature_order[i], feature_order[j]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, int>> column(idx.size());
        for (std::size_t f = 0; f < kFeatureSubset; ++f) {
            const std::size_t feature = feature_order[f];
            for (std::size_t i = 0; i < idx.size(); ++i) {
                column[i] = {features[idx[i]][feature], labels[idx[i]]};
            }
            std::sort(column.begin(), column.end());

            std::size_t total_ones = 0;
            for (const auto& [value, label] : column) total_ones += static_cast<std::size_t>(label);

            std::size_t left_count = 0;
            std::size_t left_ones = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                ++left_count;
                left_ones += static_cast<std::size_t>(column[i].second);
                if (column[i].first == column[i + 1].first) continue;
                if (left_count < params.min_leaf ||
                    column.size() - left_count < params.min_leaf) {
                    continue;
                }
                const double impurity =
                    (static_cast<double>(left_count) * gini(left_ones, left_count) +
                     static_cast<double>(column.size() - left_count) *
                         gini(total_ones - left_ones, column.size() - left_count)) /
                    static_cast<double>(column.size());
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = static_cast<int>(feature);
                    best_threshold = (column[i].first + column[i + 1].first) / 2.0;
                }
            }
        }
        if (best_feature < 0) return make_leaf(idx);

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            (features[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_idx
                                                                                   : right_idx)
                .push_back(i);
        }

        const int node_index = static_cast<int>(nodes.size());
        nodes.push_back(TreeNode{best_feature, best_threshold, -1, -1, 0});
        nodes[static_cast<std::size_t>(node_index)].left = grow(left_idx, depth + 1);
        nodes[static_cast<std::size_t>(node_index)].right = grow(right_idx, depth + 1);
        return node_index;
    }

    DecisionTree build() {
        std::vector<std::size_t> bootstrap(features.size());
        for (std::size_t& i : bootstrap) i = draw_below(rng, features.size());
        std::sort(bootstrap.begin(), bootstrap.end());
        grow(bootstrap, 0);
        return DecisionTree{std::move(nodes)};
    }
};

}  // namespace

int DecisionTree::predict(const FeatureVector& x) const {
    int at = 0;
    while (true) {
        const TreeNode& node = nodes[static_cast<std::size_t>(at)];
        if (node.feature < 0) return node.vote;
        at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                         : node.right;
    }
}

RandomForest RandomForest::train(const std::vector<FeatureVector>& features,
                                 const std::vector<int>& labels,
                                 const ForestHyperparams& params, std::uint64_t seed) {
    if (features.size() != labels.size()) {
        throw std::invalid_argument("features and labels differ in length");
    }
    if (features.size() < 2) throw std::invalid_argument("need at least 2 training pages");
    if (params.trees < 1) throw std::invalid_argument("need at least 1 tree");
    bool has_zero = false;
    bool has_one = false;
    for (int label : labels) {
        if (label == 0) has_zero = true;
        else if (label == 1) has_one = true;
        else throw std::invalid_argument("labels must be 0 or 1");
    }
    if (!has_zero || !has_one) {
        throw std::invalid_argument("training data must contain both classes");
    }

    RandomForest forest;
    forest.params_ = params;
    forest.seed_ = seed;
    forest.trees_.resize(params.trees);

    const std::size_t workers =
        std::min<std::size_t>(params.trees, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t t = w; t < params.trees; t += workers) {
                TreeBuilder builder{features, labels, params,
                                    std::mt19937_64(mix_seed(seed, t)), {}};
                forest.trees_[t] = builder.build();
            }
        }));
    }
    for (auto& f : futures) f.get();
    return forest;
}

double RandomForest::predict(const FeatureVector& x) const {
    if (trees_.empty()) throw std::logic_error("forest is not trained");
    std::size_t ones = 0;
    for (const DecisionTree& tree : trees_) ones += static_cast<std::size_t>(tree.predict(x));
    return static_cast<double>(ones) / static_cast<double>(trees_.size());
}

void RandomForest::save(const std::filesystem::path& path) const {
    json trees = json::array();
    for (const DecisionTree& tree : trees_) {
        json nodes = json::array();
        for (const TreeNode& n : tree.nodes) {
            nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.vote}));
        }
        trees.push_back(std::move(nodes));
    }
    json root{{"format", kForestFormat},
              {"version", kForestVersion},
              {"seed", seed_},
              {"hyperparams",
               {{"trees", params_.trees},
                {"max_depth", params_.max_depth},
                {"min_leaf", params_.min_leaf}}},
              {"features", json::array({"smog", "pagerank", "css_rule_count"})},
              {"trees", std::move(trees)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write forest model: " + path.string());
    out << root.dump() << "\n";
}

RandomForest RandomForest::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open forest model: " + path.string());
    json root = json::parse(in);
    if (root.value("format", "") != kForestFormat) {
        throw std::runtime_error("unrecognized forest model format: " + path.string());
    }
    if (root.value("version", 0) != kForestVersion) {
        throw std::runtime_error("unsupported forest model version: " + path.string());
    }

    RandomForest forest;
    forest.seed_ = root["seed"].get<std::uint64_t>();
    forest.params_.trees = root["hyperparams"]["trees"].get<std::size_t>();
    forest.params_.max_depth = root["hyperparams"]["max_depth"].get<std::size_t>();
    forest.params_.min_leaf = root["hyperparams"]["min_leaf"].get<std::size_t>();
    for (const auto& tree : root["trees"]) {
        DecisionTree t;
        t.nodes.reserve(tree.size());
        for (const auto& n : tree) {
            t.nodes.push_back(TreeNode{n[0].get<int>(), n[1].get<double>(), n[2].get<int>(),
                                       n[3].get<int>(), n[4].get<int>()});
        }
        forest.trees_.push_back(std::move(t));
    }
    if (forest.trees_.empty()) throw std::runtime_error("forest model has no trees");
    return forest;
}

}  // namespace misir
