// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mlp.hpp"
#include "rf.hpp"

namespace eager {

enum class ClassifierKind { rf, mlp };

ClassifierKind classifier_kind_from_string(std::string_view s);
std::string_view to_string(ClassifierKind kind);

// A trained classifier plus its provenance (config echo and seed), stored as
// a versioned JSON container. Round-trips exactly: forest structure and MLP
// weights survive save/load bit-for-bit.
class TrainedModel {
public:
    TrainedModel() = default;
    TrainedModel(RandomForest forest, RandomForestConfig cfg);
    TrainedModel(MLPModel mlp, MLPConfig cfg);

    ClassifierKind kind() const { return kind_; }
    std::size_t feature_dim() const;
    int epochs_run() const;

    // label = score >= 0.5 (ties predict match).
    std::pair<std::vector<int>, std::vector<double>> predict(const FeatureMatrix& data) const;

    void save(const std::string& path) const;
    static TrainedModel load(const std::string& path);

    std::string to_json_string() const;
    static TrainedModel from_json_string(const std::string& text, const std::string& origin);

    const RandomForest& forest() const { return std::get<RandomForest>(model_); }
    const MLPModel& mlp() const { return std::get<MLPModel>(model_); }

private:
    ClassifierKind kind_ = ClassifierKind::rf;
    std::variant<RandomForest, MLPModel> model_;
    RandomForestConfig rf_cfg_;
    MLPConfig mlp_cfg_;
};

}  // namespace eager
