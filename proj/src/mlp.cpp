// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "rng.hpp"

namespace eager {

void MLPConfig::validate() const {
    if (alpha <= 0) throw Error::invalid("Adam learning rate must be > 0");
    for (int h : hidden_sizes)
        if (h < 1) throw Error::invalid("hidden layer sizes must be positive");
    if (batch_size < 1) throw Error::invalid("batch size must be >= 1");
    if (max_epochs < 0) throw Error::invalid("max epochs must be >= 0");
}

nlohmann::json MLPConfig::to_json() const {
    return {{"hidden_sizes", hidden_sizes}, {"alpha", alpha},        {"beta1", beta1},
            {"beta2", beta2},               {"epsilon", epsilon},    {"batch_size", batch_size},
            {"max_epochs", max_epochs},     {"patience", patience},  {"seed", seed}};
}

MLPConfig MLPConfig::from_json(const nlohmann::json& j) {
    MLPConfig cfg;
    if (j.contains("hidden_sizes")) cfg.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

void Adam::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw Error::invalid("Adam state size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, double(t_));
    const double bc2 = 1.0 - std::pow(beta2_, double(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= alpha_ * mhat / (std::sqrt(vhat) + epsilon_);
    }
}

namespace {

inline double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// Numerically stable BCE with logits: max(z,0) - z*y + log(1 + exp(-|z|)).
inline double bce_with_logits(double z, int y) {
    return std::max(z, 0.0) - z * double(y) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

MLPModel MLPModel::initialize(std::size_t input_dim, const MLPConfig& cfg) {
    MLPModel model;
    model.layer_sizes_.push_back(input_dim);
    for (int h : cfg.hidden_sizes) model.layer_sizes_.push_back(std::size_t(h));
    model.layer_sizes_.push_back(1);

    std::size_t total = 0;
    for (std::size_t l = 1; l < model.layer_sizes_.size(); ++l) {
        model.weight_offsets_.push_back(total);
        total += model.layer_sizes_[l] * model.layer_sizes_[l - 1];
        model.bias_offsets_.push_back(total);
        total += model.layer_sizes_[l];
    }
    model.params_.assign(total, 0.0);

    // He initialization for the ReLU stack; biases start at zero.
    Rng rng(derive_seed(cfg.seed, 0x31337));
    for (std::size_t l = 1; l < model.layer_sizes_.size(); ++l) {
        const double stddev = std::sqrt(2.0 / double(model.layer_sizes_[l - 1]));
        double* w = model.params_.data() + model.weight_offsets_[l - 1];
        for (std::size_t i = 0; i < model.layer_sizes_[l] * model.layer_sizes_[l - 1]; ++i)
            w[i] = stddev * rng.normal();
    }
    return model;
}

double MLPModel::forward(std::span<const double> row, std::vector<std::vector<double>>* activations) const {
    if (row.size() != layer_sizes_.front())
        throw Error::invalid("feature dimension mismatch: model expects ", layer_sizes_.front(), ", got ",
                             row.size());
    std::vector<double> cur(row.begin(), row.end());
    if (activations) activations->push_back(cur);
    for (std::size_t l = 1; l < layer_sizes_.size(); ++l) {
        const std::size_t out_n = layer_sizes_[l], in_n = layer_sizes_[l - 1];
        const double* w = params_.data() + weight_offsets_[l - 1];
        const double* b = params_.data() + bias_offsets_[l - 1];
        std::vector<double> next(out_n);
        for (std::size_t o = 0; o < out_n; ++o) {
            double z = b[o];
            const double* wrow = w + o * in_n;
            for (std::size_t i = 0; i < in_n; ++i) z += wrow[i] * cur[i];
            next[o] = z;
        }
        const bool last = l + 1 == layer_sizes_.size();
        if (!last)
            for (double& z : next) z = std::max(z, 0.0);
        if (activations) activations->push_back(next);
        cur = std::move(next);
    }
    return cur[0];  // logit
}

void MLPModel::accumulate_gradient(std::span<const double> row, int label, std::vector<double>& grad) const {
    std::vector<std::vector<double>> acts;  // acts[0] = input, acts[l] = post-activation of layer l (logit last)
    double z = forward(row, &acts);
    // dL/dz for BCE-with-logits.
    std::vector<double> delta{sigmoid(z) - double(label)};
    for (std::size_t l = layer_sizes_.size() - 1; l >= 1; --l) {
        const std::size_t out_n = layer_sizes_[l], in_n = layer_sizes_[l - 1];
        const double* w = params_.data() + weight_offsets_[l - 1];
        double* gw = grad.data() + weight_offsets_[l - 1];
        double* gb = grad.data() + bias_offsets_[l - 1];
        const std::vector<double>& input = acts[l - 1];
        for (std::size_t o = 0; o < out_n; ++o) {
            gb[o] += delta[o];
            double* gwrow = gw + o * in_n;
            for (std::size_t i = 0; i < in_n; ++i) gwrow[i] += delta[o] * input[i];
        }
        if (l == 1) break;
        // Propagate through the previous ReLU: zero where the activation was
        // clamped (the derivative at exactly 0 is taken as 0).
        std::vector<double> prev(in_n, 0.0);
        for (std::size_t i = 0; i < in_n; ++i) {
            if (input[i] <= 0.0) continue;
            double acc = 0.0;
            for (std::size_t o = 0; o < out_n; ++o) acc += w[o * in_n + i] * delta[o];
            prev[i] = acc;
        }
        delta = std::move(prev);
    }
}

MLPModel MLPModel::train(const FeatureMatrix& data, const FeatureMatrix* validation, const MLPConfig& cfg) {
    cfg.validate();
    if (data.row_count < 2) throw Error::invalid("MLP training needs at least 2 rows");
    std::size_t n_match = 0;
    for (int l : data.labels) n_match += std::size_t(l);
    if (n_match == 0 || n_match == data.row_count)
        throw Error::invalid("MLP training needs both classes present");
    if (validation && validation->row_count && validation->feature_dim != data.feature_dim)
        throw Error::invalid("validation feature dimension mismatch");

    MLPModel model = initialize(data.feature_dim, cfg);
    Adam adam(model.params_.size(), cfg.alpha, cfg.beta1, cfg.beta2, cfg.epsilon);
    Rng rng(derive_seed(cfg.seed, 0xADA));

    const bool early_stop = validation && validation->row_count > 0 && cfg.patience > 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = model.params_;
    int best_epoch = 0, since_best = 0;

    std::vector<std::size_t> order(data.row_count);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(model.params_.size());

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t r = order[i];
                batch_loss += bce_with_logits(model.forward(data.row(r), nullptr), data.labels[r]);
                model.accumulate_gradient(data.row(r), data.labels[r], grad);
            }
            const double inv = 1.0 / double(end - start);
            for (double& g : grad) g *= inv;
            adam.step(model.params_, grad);
            epoch_loss += batch_loss;
        }
        if (!std::isfinite(epoch_loss))
            throw Error::runtime("non-finite MLP training loss at epoch ", epoch);
        model.epochs_run_ = epoch + 1;

        if (early_stop) {
            double val_loss = 0.0;
            for (std::size_t r = 0; r < validation->row_count; ++r)
                val_loss += bce_with_logits(model.forward(validation->row(r), nullptr), validation->labels[r]);
            val_loss /= double(validation->row_count);
            if (val_loss < best_val_loss) {
                best_val_loss = val_loss;
                best_params = model.params_;
                best_epoch = model.epochs_run_;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                model.params_ = best_params;
                model.epochs_run_ = best_epoch;
                return model;
            }
        }
    }
    if (early_stop && best_epoch > 0) {
        model.params_ = best_params;
        model.epochs_run_ = best_epoch;
    }
    return model;
}

double MLPModel::score(std::span<const double> row) const { return sigmoid(forward(row, nullptr)); }

std::vector<double> MLPModel::scores(const FeatureMatrix& data) const {
    std::vector<double> out(data.row_count);
    for (std::size_t i = 0; i < data.row_count; ++i) out[i] = score(data.row(i));
    return out;
}

double MLPModel::summed_loss(const FeatureMatrix& data) const {
    double total = 0.0;
    for (std::size_t r = 0; r < data.row_count; ++r)
        total += bce_with_logits(forward(data.row(r), nullptr), data.labels[r]);
    return total;
}

std::vector<double> MLPModel::summed_loss_gradient(const FeatureMatrix& data) const {
    std::vector<double> grad(params_.size(), 0.0);
    for (std::size_t r = 0; r < data.row_count; ++r) accumulate_gradient(data.row(r), data.labels[r], grad);
    return grad;
}

double MLPModel::gradient_check(const MLPConfig& cfg, const FeatureMatrix& probe) {
    if (probe.row_count == 0 || probe.row_count > 10)
        throw Error::invalid("gradient check probe must have 1..10 rows");
    MLPModel model = initialize(probe.feature_dim, cfg);
    const std::vector<double> analytic = model.summed_loss_gradient(probe);

    const double h = 1e-5;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < model.params_.size(); ++i) {
        const double saved = model.params_[i];
        model.params_[i] = saved + h;
        const double up = model.summed_loss(probe);
        model.params_[i] = saved - h;
        const double down = model.summed_loss(probe);
        model.params_[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1.0});
        max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
    }
    return max_rel;
}

nlohmann::json MLPModel::to_json() const {
    return {{"layer_sizes", layer_sizes_}, {"params", params_}, {"epochs_run", epochs_run_}};
}

MLPModel MLPModel::from_json(const nlohmann::json& j) {
    MLPModel model;
    model.layer_sizes_ = j.at("layer_sizes").get<std::vector<std::size_t>>();
    model.params_ = j.at("params").get<std::vector<double>>();
    model.epochs_run_ = j.value("epochs_run", 0);
    if (model.layer_sizes_.size() < 2) throw Error::invalid("model: layer_sizes must list at least two layers");
    std::size_t total = 0;
    for (std::size_t l = 1; l < model.layer_sizes_.size(); ++l) {
        model.weight_offsets_.push_back(total);
        total += model.layer_sizes_[l] * model.layer_sizes_[l - 1];
        model.bias_offsets_.push_back(total);
        total += model.layer_sizes_[l];
    }
    if (total != model.params_.size())
        throw Error::invalid("model: parameter count ", model.params_.size(), " does not match layer sizes");
    return model;
}

}  // namespace eager
