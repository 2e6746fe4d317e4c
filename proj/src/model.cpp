// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "model.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace eager {

namespace {
constexpr int kModelFormatVersion = 1;
constexpr const char* kModelFormatName = "eager-model";
}  // namespace

ClassifierKind classifier_kind_from_string(std::string_view s) {
    if (s == "rf") return ClassifierKind::rf;
    if (s == "mlp") return ClassifierKind::mlp;
    throw Error::invalid("unknown classifier '", std::string(s), "' (expected rf or mlp)");
}

std::string_view to_string(ClassifierKind kind) { return kind == ClassifierKind::rf ? "rf" : "mlp"; }

TrainedModel::TrainedModel(RandomForest forest, RandomForestConfig cfg)
    : kind_(ClassifierKind::rf), model_(std::move(forest)), rf_cfg_(cfg) {}

TrainedModel::TrainedModel(MLPModel mlp, MLPConfig cfg)
    : kind_(ClassifierKind::mlp), model_(std::move(mlp)), mlp_cfg_(std::move(cfg)) {}

std::size_t TrainedModel::feature_dim() const {
    return kind_ == ClassifierKind::rf ? forest().feature_dim() : mlp().feature_dim();
}

int TrainedModel::epochs_run() const { return kind_ == ClassifierKind::mlp ? mlp().epochs_run() : 0; }

std::pair<std::vector<int>, std::vector<double>> TrainedModel::predict(const FeatureMatrix& data) const {
    if (data.row_count && data.feature_dim != feature_dim())
        throw Error::invalid("feature dimension mismatch: model expects ", feature_dim(), ", got ",
                             data.feature_dim);
    std::vector<double> scores =
        kind_ == ClassifierKind::rf ? forest().scores(data) : mlp().scores(data);
    std::vector<int> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= 0.5 ? 1 : 0;
    return {std::move(labels), std::move(scores)};
}

std::string TrainedModel::to_json_string() const {
    nlohmann::json j = {{"format", kModelFormatName}, {"version", kModelFormatVersion},
                        {"kind", std::string(to_string(kind_))}};
    if (kind_ == ClassifierKind::rf) {
        j["config"] = rf_cfg_.to_json();
        j["forest"] = forest().to_json();
    } else {
        j["config"] = mlp_cfg_.to_json();
        j["mlp"] = mlp().to_json();
    }
    return j.dump(2);
}

TrainedModel TrainedModel::from_json_string(const std::string& text, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error::invalid(origin, ": malformed model JSON: ", e.what());
    }
    if (j.value("format", "") != kModelFormatName)
        throw Error::invalid(origin, ": not a model container");
    if (j.value("version", -1) != kModelFormatVersion)
        throw Error::invalid(origin, ": unsupported model container version ", j.value("version", -1));
    TrainedModel model;
    try {
        model.kind_ = classifier_kind_from_string(j.at("kind").get<std::string>());
        if (model.kind_ == ClassifierKind::rf) {
            model.rf_cfg_ = RandomForestConfig::from_json(j.at("config"));
            model.model_ = RandomForest::from_json(j.at("forest"));
        } else {
            model.mlp_cfg_ = MLPConfig::from_json(j.at("config"));
            model.model_ = MLPModel::from_json(j.at("mlp"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error::invalid(origin, ": model structure invalid: ", e.what());
    }
    return model;
}

void TrainedModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::io("cannot write model file: ", path);
    out << to_json_string() << '\n';
    if (!out) throw Error::io("failed writing model file: ", path);
}

TrainedModel TrainedModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error::io("cannot open model file: ", path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text, path);
}

}  // namespace eager
