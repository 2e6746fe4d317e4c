// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dataset.hpp"

namespace eager {

struct RandomForestConfig {
    int n_trees = 500;
    int max_depth = 0;           // 0 = unlimited
    int min_samples_split = 2;
    int features_per_split = 0;  // 0 = ceil(sqrt(F))
    bool bootstrap = true;
    uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static RandomForestConfig from_json(const nlohmann::json& j);
};

// One CART tree. Inner nodes route row[feature] <= threshold to the left
// child; leaves carry the training class counts.
struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        uint32_t left = 0, right = 0;
        uint32_t count_nonmatch = 0, count_match = 0;
    };
    std::vector<Node> nodes;

    // Majority vote of the reached leaf; exact ties vote match.
    int vote(std::span<const double> row) const;
};

// Bagged CART forest with Gini splits and a random feature subset per split.
// Tree t draws from a generator seeded by (seed, t), so training is
// deterministic regardless of how many threads build trees.
class RandomForest {
public:
    static RandomForest train(const FeatureMatrix& data, const RandomForestConfig& cfg);

    // Fraction of trees voting match, one score per row.
    std::vector<double> scores(const FeatureMatrix& data) const;
    double score(std::span<const double> row) const;

    std::size_t feature_dim() const { return feature_dim_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

    nlohmann::json to_json() const;
    static RandomForest from_json(const nlohmann::json& j);

private:
    std::vector<DecisionTree> trees_;
    std::size_t feature_dim_ = 0;
};

}  // namespace eager
