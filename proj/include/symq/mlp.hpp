#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "symq/matrix.hpp"
#include "symq/rng.hpp"

namespace symq {

// Fully-connected net, ReLU on hidden layers, linear output.
struct MlpNet {
    std::vector<int> layer_sizes;
    std::vector<Matrix> weights;               // weights[l]: sizes[l+1] x sizes[l]
    std::vector<std::vector<double>> biases;   // biases[l]: sizes[l+1]

    MlpNet() = default;
    explicit MlpNet(std::vector<int> sizes);   // zero parameters

    // Uniform ±1/sqrt(fan_in) init, consumed from rng in fixed order.
    static MlpNet init(std::vector<int> sizes, Rng& rng);

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
    bool same_arch(const MlpNet& other) const { return layer_sizes == other.layer_sizes; }
    size_t param_count() const;
};

struct ForwardCache {
    Matrix input;
    std::vector<Matrix> pre;   // pre-activations per layer
    std::vector<Matrix> act;   // ReLU outputs for hidden layers

    const Matrix& output() const { return pre.back(); }
};

struct LayerGrads {
    Matrix dw;
    std::vector<double> db;
};

struct MlpGrads {
    std::vector<LayerGrads> layers;

    static MlpGrads zeros_like(const MlpNet& net);
    void scale(double c);
};

void forward(const MlpNet& net, const Matrix& x, ForwardCache& cache);
std::vector<double> forward(const MlpNet& net, std::span<const double> x);

// upstream = dL/d(output), shape B x out. Optionally also produces dL/d(input).
void backward(const MlpNet& net, const ForwardCache& cache, const Matrix& upstream,
              MlpGrads& grads, Matrix* dinput = nullptr);

struct AdamState {
    int64_t step = 0;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<Matrix> mw, vw;
    std::vector<std::vector<double>> mb, vb;

    static AdamState make(const MlpNet& net, double lr);
};

void adam_step(MlpNet& net, const MlpGrads& grads, AdamState& state);

struct ScalarAdamState {
    int64_t step = 0;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double m = 0.0, v = 0.0;
};

void adam_step(double& param, double grad, ScalarAdamState& state);

// target <- rho * target + (1 - rho) * online
void polyak_update(MlpNet& target, const MlpNet& online, double rho);

void to_json(nlohmann::json& j, const MlpNet& net);
void from_json(const nlohmann::json& j, MlpNet& net);

} // namespace symq
