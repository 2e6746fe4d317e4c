// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "rf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "rng.hpp"

namespace eager {

void RandomForestConfig::validate() const {
    if (n_trees < 1) throw Error::invalid("random forest needs at least one tree");
    if (min_samples_split < 2) throw Error::invalid("min_samples_split must be >= 2");
    if (max_depth < 0 || features_per_split < 0) throw Error::invalid("negative forest hyperparameter");
}

nlohmann::json RandomForestConfig::to_json() const {
    return {{"n_trees", n_trees},         {"max_depth", max_depth},
            {"min_samples_split", min_samples_split}, {"features_per_split", features_per_split},
            {"bootstrap", bootstrap},     {"seed", seed}};
}

RandomForestConfig RandomForestConfig::from_json(const nlohmann::json& j) {
    RandomForestConfig cfg;
    cfg.n_trees = j.value("n_trees", cfg.n_trees);
    cfg.max_depth = j.value("max_depth", cfg.max_depth);
    cfg.min_samples_split = j.value("min_samples_split", cfg.min_samples_split);
    cfg.features_per_split = j.value("features_per_split", cfg.features_per_split);
    cfg.bootstrap = j.value("bootstrap", cfg.bootstrap);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

int DecisionTree::vote(std::span<const double> row) const {
    uint32_t i = 0;
    while (nodes[i].feature >= 0) i = row[std::size_t(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].count_match >= nodes[i].count_nonmatch ? 1 : 0;
}

namespace {

struct TreeBuilder {
    const FeatureMatrix& data;
    const RandomForestConfig& cfg;
    int features_per_split;
    Rng rng;
    DecisionTree tree;
    std::vector<int> feature_pool;

    TreeBuilder(const FeatureMatrix& d, const RandomForestConfig& c, uint64_t tree_seed)
        : data(d), cfg(c), rng(tree_seed) {
        features_per_split = cfg.features_per_split
                                 ? cfg.features_per_split
                                 : int(std::ceil(std::sqrt(double(data.feature_dim))));
        features_per_split = std::min<int>(features_per_split, int(data.feature_dim));
        feature_pool.resize(data.feature_dim);
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
    }

    static double gini_weighted(std::size_t l0, std::size_t l1, std::size_t r0, std::size_t r1) {
        auto gini = [](double a, double b) {
            double n = a + b;
            return 1.0 - (a * a + b * b) / (n * n);
        };
        double nl = double(l0 + l1), nr = double(r0 + r1);
        return (nl * gini(double(l0), double(l1)) + nr * gini(double(r0), double(r1))) / (nl + nr);
    }

    uint32_t build(std::vector<uint32_t>& indices, int depth) {
        std::size_t n_match = 0;
        for (uint32_t i : indices) n_match += std::size_t(data.labels[i]);
        const std::size_t n = indices.size();
        const std::size_t n_nonmatch = n - n_match;

        uint32_t node_id = uint32_t(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[node_id].count_nonmatch = uint32_t(n_nonmatch);
        tree.nodes[node_id].count_match = uint32_t(n_match);

        bool stop = n_match == 0 || n_nonmatch == 0 || n < std::size_t(cfg.min_samples_split) ||
                    (cfg.max_depth > 0 && depth >= cfg.max_depth);
        if (stop) return node_id;

        // Partial Fisher-Yates draws the feature subset for this split.
        for (int k = 0; k < features_per_split; ++k)
            std::swap(feature_pool[k], feature_pool[k + rng.index(feature_pool.size() - k)]);

        int best_feature = -1;
        double best_threshold = 0.0, best_score = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, int>> column(n);
        for (int k = 0; k < features_per_split; ++k) {
            const int f = feature_pool[k];
            for (std::size_t i = 0; i < n; ++i)
                column[i] = {data.row(indices[i])[std::size_t(f)], data.labels[indices[i]]};
            std::sort(column.begin(), column.end());
            std::size_t l0 = 0, l1 = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (column[i].second) ++l1;
                else ++l0;
                if (column[i].first == column[i + 1].first) continue;
                double score = gini_weighted(l0, l1, n_nonmatch - l0, n_match - l1);
                if (score < best_score) {
                    best_score = score;
                    best_feature = f;
                    double lo = column[i].first, hi = column[i + 1].first;
                    double mid = lo + (hi - lo) / 2.0;
                    best_threshold = mid < hi ? mid : lo;
                }
            }
        }
        if (best_feature < 0) return node_id;  // all sampled features constant

        std::vector<uint32_t> left_idx, right_idx;
        for (uint32_t i : indices) {
            if (data.row(i)[std::size_t(best_feature)] <= best_threshold) left_idx.push_back(i);
            else right_idx.push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) return node_id;

        indices.clear();
        indices.shrink_to_fit();
        uint32_t left = build(left_idx, depth + 1);
        uint32_t right = build(right_idx, depth + 1);
        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        tree.nodes[node_id].left = left;
        tree.nodes[node_id].right = right;
        return node_id;
    }
};

}  // namespace

RandomForest RandomForest::train(const FeatureMatrix& data, const RandomForestConfig& cfg) {
    cfg.validate();
    if (data.row_count < 2) throw Error::invalid("forest training needs at least 2 rows");
    std::size_t n_match = 0;
    for (int l : data.labels) n_match += std::size_t(l);
    if (n_match == 0 || n_match == data.row_count)
        throw Error::invalid("forest training needs both classes present");

    RandomForest forest;
    forest.feature_dim_ = data.feature_dim;
    forest.trees_.resize(std::size_t(cfg.n_trees));
    parallel_for(std::size_t(cfg.n_trees), [&](std::size_t t) {
        TreeBuilder builder(data, cfg, derive_seed(cfg.seed, t));
        std::vector<uint32_t> indices(data.row_count);
        if (cfg.bootstrap) {
            for (auto& i : indices) i = uint32_t(builder.rng.index(data.row_count));
        } else {
            std::iota(indices.begin(), indices.end(), 0);
        }
        builder.build(indices, 0);
        forest.trees_[t] = std::move(builder.tree);
    });
    return forest;
}

double RandomForest::score(std::span<const double> row) const {
    if (row.size() != feature_dim_)
        throw Error::invalid("feature dimension mismatch: model expects ", feature_dim_, ", got ", row.size());
    std::size_t votes = 0;
    for (const DecisionTree& t : trees_) votes += std::size_t(t.vote(row));
    return double(votes) / double(trees_.size());
}

std::vector<double> RandomForest::scores(const FeatureMatrix& data) const {
    std::vector<double> out(data.row_count);
    parallel_for(data.row_count, [&](std::size_t i) { out[i] = score(data.row(i)); });
    return out;
}

nlohmann::json RandomForest::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& t : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count_nonmatch, n.count_match});
        trees.push_back(std::move(nodes));
    }
    return {{"feature_dim", feature_dim_}, {"trees", std::move(trees)}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
    RandomForest forest;
    forest.feature_dim_ = j.at("feature_dim").get<std::size_t>();
    for (const auto& tj : j.at("trees")) {
        DecisionTree tree;
        for (const auto& nj : tj) {
            DecisionTree::Node n;
            n.feature = nj.at(0).get<int>();
            n.threshold = nj.at(1).get<double>();
            n.left = nj.at(2).get<uint32_t>();
            n.right = nj.at(3).get<uint32_t>();
            n.count_nonmatch = nj.at(4).get<uint32_t>();
            n.count_match = nj.at(5).get<uint32_t>();
            tree.nodes.push_back(n);
        }
        forest.trees_.push_back(std::move(tree));
    }
    return forest;
}

}  // namespace eager
