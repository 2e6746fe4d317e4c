// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dataset.hpp"

namespace eager {

struct MLPConfig {
    std::vector<int> hidden_sizes{200, 20};
    double alpha = 1e-5;  // Adam learning rate
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 32;
    int max_epochs = 200;
    int patience = 10;  // early-stop patience on validation loss; <= 0 disables
    uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static MLPConfig from_json(const nlohmann::json& j);
};

// Adam with bias correction over a flat parameter vector.
class Adam {
public:
    Adam(std::size_t n, double alpha, double beta1, double beta2, double epsilon)
        : alpha_(alpha), beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads);
    int64_t steps_taken() const { return t_; }

private:
    double alpha_, beta1_, beta2_, epsilon_;
    std::vector<double> m_, v_;
    int64_t t_ = 0;
};

// Fully connected ReLU network with a single logistic output, trained with
// Adam on binary cross-entropy. He-initialized from the seeded generator;
// training is single-threaded and bit-deterministic for a fixed seed.
class MLPModel {
public:
    // validation may be null/empty, which disables early stopping.
    static MLPModel train(const FeatureMatrix& data, const FeatureMatrix* validation, const MLPConfig& cfg);

    std::vector<double> scores(const FeatureMatrix& data) const;
    double score(std::span<const double> row) const;

    std::size_t feature_dim() const { return layer_sizes_.front(); }
    int epochs_run() const { return epochs_run_; }
    const std::vector<double>& parameters() const { return params_; }

    // Max relative gradient error of backprop against central finite
    // differences (h = 1e-5) on a freshly initialized network, over every
    // parameter, for the summed loss on the probe rows. Relative error uses
    // denominator max(|analytic|, |numeric|, 1).
    static double gradient_check(const MLPConfig& cfg, const FeatureMatrix& probe);

    // Summed binary cross-entropy loss and its gradient (test hook; the
    // gradient check and the linearity properties are phrased on sums).
    double summed_loss(const FeatureMatrix& data) const;
    std::vector<double> summed_loss_gradient(const FeatureMatrix& data) const;

    nlohmann::json to_json() const;
    static MLPModel from_json(const nlohmann::json& j);

private:
    static MLPModel initialize(std::size_t input_dim, const MLPConfig& cfg);
    double forward(std::span<const double> row, std::vector<std::vector<double>>* activations) const;
    void accumulate_gradient(std::span<const double> row, int label, std::vector<double>& grad) const;

    std::vector<std::size_t> layer_sizes_;  // [input, hidden..., 1]
    std::vector<double> params_;            // per layer: row-major weights, then biases
    std::vector<std::size_t> weight_offsets_, bias_offsets_;
    int epochs_run_ = 0;
};

}  // namespace eager
