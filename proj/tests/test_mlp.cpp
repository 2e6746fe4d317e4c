// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "mlp.hpp"
#include "model.hpp"
#include "rng.hpp"

using namespace eager;

namespace {

FeatureMatrix make_matrix(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    FeatureMatrix m;
    m.feature_dim = rows.empty() ? 0 : rows.front().size();
    m.row_count = rows.size();
    m.labels = labels;
    for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
    return m;
}

FeatureMatrix xor_data() {
    return make_matrix({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
}

}  // namespace

TEST_CASE("adam matches a scalar reimplementation to 1e-12") {
    // Independent update on two plain doubles.
    double p0 = 0.3, p1 = -1.2;
    double m0 = 0, m1 = 0, v0 = 0, v1 = 0;
    const double alpha = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;

    std::vector<double> params = {p0, p1};
    Adam adam(2, alpha, b1, b2, eps);

    Rng rng(6);
    for (int t = 1; t <= 25; ++t) {
        const double g0 = rng.uniform(-1, 1), g1 = rng.uniform(-1, 1);
        adam.step(params, std::vector<double>{g0, g1});

        m0 = b1 * m0 + (1 - b1) * g0;
        v0 = b2 * v0 + (1 - b2) * g0 * g0;
        m1 = b1 * m1 + (1 - b1) * g1;
        v1 = b2 * v1 + (1 - b2) * g1 * g1;
        const double c1 = 1 - std::pow(b1, t), c2 = 1 - std::pow(b2, t);
        p0 -= alpha * (m0 / c1) / (std::sqrt(v0 / c2) + eps);
        p1 -= alpha * (m1 / c1) / (std::sqrt(v1 / c2) + eps);

        CHECK(std::abs(params[0] - p0) < 1e-12);
        CHECK(std::abs(params[1] - p1) < 1e-12);
    }
}

TEST_CASE("gradient check: backprop vs central differences") {
    Rng rng(18);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) {
        rows.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        labels.push_back(i % 2);
    }
    MLPConfig cfg;
    cfg.hidden_sizes = {7, 5};
    cfg.seed = 21;
    CHECK(MLPModel::gradient_check(cfg, make_matrix(rows, labels)) < 1e-4);

    MLPConfig big;  // default (200, 20) hidden stack
    big.seed = 22;
    CHECK(MLPModel::gradient_check(big, make_matrix(rows, labels)) < 1e-4);
}

TEST_CASE("summed loss gradient is additive over duplicate rows") {
    MLPConfig cfg;
    cfg.hidden_sizes = {6};
    cfg.seed = 30;
    cfg.max_epochs = 0;
    FeatureMatrix one = make_matrix({{0.4, -0.2}}, {1});
    FeatureMatrix twice = make_matrix({{0.4, -0.2}, {0.4, -0.2}}, {1, 1});
    FeatureMatrix both = make_matrix({{0.4, -0.2}, {0.9, 0.3}}, {1, 0});
    MLPModel model = MLPModel::train(both, nullptr, cfg);  // zero-epoch: He init only
    std::vector<double> g1 = model.summed_loss_gradient(one);
    std::vector<double> g2 = model.summed_loss_gradient(twice);
    REQUIRE(g1.size() == g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == doctest::Approx(2.0 * g1[i]).epsilon(1e-12));
}

TEST_CASE("zero network, zero inputs: output bias gradient is sum of (1/2 - y)") {
    MLPConfig cfg;
    cfg.hidden_sizes = {3};
    cfg.seed = 1;
    FeatureMatrix probe = make_matrix({{0, 0}, {0, 0}, {0, 0}}, {1, 0, 1});
    MLPModel model = MLPModel::train(make_matrix({{0, 0}, {1, 1}}, {0, 1}), nullptr, [] {
        MLPConfig c;
        c.hidden_sizes = {3};
        c.max_epochs = 0;
        return c;
    }());
    // zero out every parameter through serialization
    nlohmann::json j = model.to_json();
    for (auto& p : j.at("params")) p = 0.0;
    MLPModel zeroed = MLPModel::from_json(j);

    std::vector<double> grad = zeroed.summed_loss_gradient(probe);
    // layout: [W1 (3x2) | b1 (3) | W2 (1x3) | b2 (1)]; with everything zero
    // and ReLU'(0) = 0, only the output bias receives gradient.
    const double expected_b2 = (0.5 - 1) + (0.5 - 0) + (0.5 - 1);
    CHECK(grad.back() == doctest::Approx(expected_b2).epsilon(1e-12));
    for (std::size_t i = 0; i + 1 < grad.size(); ++i) CHECK(grad[i] == 0.0);
}

TEST_CASE("the MLP solves XOR with a raised learning rate") {
    MLPConfig cfg;
    cfg.alpha = 1e-2;
    cfg.max_epochs = 5000;
    cfg.batch_size = 4;
    cfg.patience = 0;
    cfg.seed = 2;
    FeatureMatrix data = xor_data();
    MLPModel model = MLPModel::train(data, nullptr, cfg);
    std::vector<double> scores = model.scores(data);
    for (std::size_t i = 0; i < data.row_count; ++i)
        CHECK((scores[i] >= 0.5 ? 1 : 0) == data.labels[i]);
}

TEST_CASE("zero-epoch training yields probabilities strictly inside (0,1)") {
    MLPConfig cfg;
    cfg.max_epochs = 0;
    cfg.seed = 3;
    FeatureMatrix data = xor_data();
    MLPModel model = MLPModel::train(data, nullptr, cfg);
    for (double s : model.scores(data)) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
    CHECK(model.epochs_run() == 0);
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
    MLPConfig cfg;
    cfg.hidden_sizes = {16, 4};
    cfg.alpha = 1e-3;
    cfg.max_epochs = 30;
    cfg.seed = 44;
    FeatureMatrix data = xor_data();
    MLPModel a = MLPModel::train(data, nullptr, cfg);
    MLPModel b = MLPModel::train(data, nullptr, cfg);
    REQUIRE(a.parameters().size() == b.parameters().size());
    for (std::size_t i = 0; i < a.parameters().size(); ++i) CHECK(a.parameters()[i] == b.parameters()[i]);
}

TEST_CASE("early stopping restores the best-validation weights") {
    Rng rng(55);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        rows.push_back({double(label) + rng.uniform(-0.3, 0.3), rng.uniform(-1, 1)});
        labels.push_back(label);
    }
    FeatureMatrix train = make_matrix(rows, labels);
    // validation labels inverted: validation loss only degrades as the model fits
    std::vector<int> inverted;
    for (int l : labels) inverted.push_back(1 - l);
    FeatureMatrix validation = make_matrix(rows, inverted);

    MLPConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.alpha = 5e-3;
    cfg.max_epochs = 200;
    cfg.patience = 3;
    cfg.seed = 5;
    MLPModel model = MLPModel::train(train, &validation, cfg);
    CHECK(model.epochs_run() < 200);
    CHECK(model.epochs_run() >= 1);
}

TEST_CASE("MLP models serialize exactly") {
    MLPConfig cfg;
    cfg.hidden_sizes = {5, 3};
    cfg.alpha = 1e-3;
    cfg.max_epochs = 20;
    cfg.seed = 61;
    FeatureMatrix data = xor_data();
    TrainedModel model(MLPModel::train(data, nullptr, cfg), cfg);
    std::string text = model.to_json_string();
    TrainedModel back = TrainedModel::from_json_string(text, "test");
    CHECK(back.to_json_string() == text);
    auto [l1, s1] = model.predict(data);
    auto [l2, s2] = back.predict(data);
    CHECK(s1 == s2);
}

TEST_CASE("training rejects single-class input and reports non-finite loss") {
    MLPConfig cfg;
    cfg.seed = 70;
    FeatureMatrix single = make_matrix({{1, 2}, {3, 4}}, {1, 1});
    CHECK_THROWS_AS(MLPModel::train(single, nullptr, cfg), Error);

    MLPConfig blowup;
    blowup.hidden_sizes = {4};
    blowup.alpha = 1e160;  // drives the logits to overflow within two steps
    blowup.max_epochs = 10;
    blowup.batch_size = 4;
    blowup.seed = 71;
    FeatureMatrix data = xor_data();
    CHECK_THROWS_AS(MLPModel::train(data, nullptr, blowup), Error);
}
