#include "symq/mlp.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "symq/error.hpp"
#include "symq/kernels.hpp"

namespace symq {

namespace {

void check_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2) throw ConfigError("MlpNet needs at least input and output layers");
    for (int s : sizes)
        if (s <= 0) throw ConfigError("MlpNet layer sizes must be positive");
}

} // namespace

MlpNet::MlpNet(std::vector<int> sizes) : layer_sizes(std::move(sizes)) {
    check_sizes(layer_sizes);
    const int L = static_cast<int>(layer_sizes.size()) - 1;
    weights.reserve(static_cast<size_t>(L));
    biases.reserve(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) {
        weights.emplace_back(layer_sizes[static_cast<size_t>(l) + 1], layer_sizes[static_cast<size_t>(l)]);
        biases.emplace_back(static_cast<size_t>(layer_sizes[static_cast<size_t>(l) + 1]), 0.0);
    }
}

MlpNet MlpNet::init(std::vector<int> sizes, Rng& rng) {
    MlpNet net(std::move(sizes));
    for (int l = 0; l < net.num_layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.weights[static_cast<size_t>(l)].cols));
        for (double& w : net.weights[static_cast<size_t>(l)].v) w = rng.uniform(-bound, bound);
        for (double& b : net.biases[static_cast<size_t>(l)]) b = rng.uniform(-bound, bound);
    }
    return net;
}

size_t MlpNet::param_count() const {
    size_t n = 0;
    for (const auto& w : weights) n += w.v.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

MlpGrads MlpGrads::zeros_like(const MlpNet& net) {
    MlpGrads g;
    g.layers.reserve(net.weights.size());
    for (int l = 0; l < net.num_layers(); ++l)
        g.layers.push_back({Matrix(net.weights[static_cast<size_t>(l)].rows,
                                   net.weights[static_cast<size_t>(l)].cols),
                            std::vector<double>(net.biases[static_cast<size_t>(l)].size(), 0.0)});
    return g;
}

void MlpGrads::scale(double c) {
    for (auto& layer : layers) {
        for (double& x : layer.dw.v) x *= c;
        for (double& x : layer.db) x *= c;
    }
}

void forward(const MlpNet& net, const Matrix& x, ForwardCache& cache) {
    if (x.cols != net.input_dim()) throw ShapeError("forward: input dim mismatch");
    const int L = net.num_layers();
    cache.input = x;
    cache.pre.resize(static_cast<size_t>(L));
    cache.act.resize(static_cast<size_t>(L) - 1);
    const Matrix* cur = &cache.input;
    for (int l = 0; l < L; ++l) {
        auto& pre = cache.pre[static_cast<size_t>(l)];
        pre = Matrix(x.rows, net.layer_sizes[static_cast<size_t>(l) + 1]);
        kernels::linear_forward(*cur, net.weights[static_cast<size_t>(l)],
                                net.biases[static_cast<size_t>(l)], pre);
        if (l < L - 1) {
            auto& act = cache.act[static_cast<size_t>(l)];
            act = Matrix(pre.rows, pre.cols);
            kernels::relu_forward(pre, act);
            cur = &act;
        }
    }
}

std::vector<double> forward(const MlpNet& net, std::span<const double> x) {
    Matrix xm(1, static_cast<int>(x.size()));
    std::copy(x.begin(), x.end(), xm.v.begin());
    ForwardCache cache;
    forward(net, xm, cache);
    return cache.output().v;
}

void backward(const MlpNet& net, const ForwardCache& cache, const Matrix& upstream,
              MlpGrads& grads, Matrix* dinput) {
    const int L = net.num_layers();
    if (static_cast<int>(grads.layers.size()) != L)
        throw ShapeError("backward: grads layer count mismatch");
    if (upstream.rows != cache.input.rows || upstream.cols != net.output_dim())
        throw ShapeError("backward: upstream shape mismatch");

    Matrix dpre = upstream;
    for (int l = L - 1; l >= 0; --l) {
        const Matrix& layer_in = l == 0 ? cache.input : cache.act[static_cast<size_t>(l) - 1];
        auto& g = grads.layers[static_cast<size_t>(l)];
        kernels::linear_grad_weights(dpre, layer_in, g.dw);
        kernels::linear_grad_bias(dpre, g.db);
        if (l > 0) {
            Matrix din(layer_in.rows, layer_in.cols);
            kernels::linear_grad_input(dpre, net.weights[static_cast<size_t>(l)], din);
            kernels::relu_backward(cache.pre[static_cast<size_t>(l) - 1], din);
            dpre = std::move(din);
        } else if (dinput != nullptr) {
            *dinput = Matrix(cache.input.rows, cache.input.cols);
            kernels::linear_grad_input(dpre, net.weights[0], *dinput);
        }
    }
}

AdamState AdamState::make(const MlpNet& net, double lr) {
    AdamState st;
    st.lr = lr;
    for (int l = 0; l < net.num_layers(); ++l) {
        const auto& w = net.weights[static_cast<size_t>(l)];
        st.mw.emplace_back(w.rows, w.cols);
        st.vw.emplace_back(w.rows, w.cols);
        st.mb.emplace_back(net.biases[static_cast<size_t>(l)].size(), 0.0);
        st.vb.emplace_back(net.biases[static_cast<size_t>(l)].size(), 0.0);
    }
    return st;
}

namespace {

void adam_apply(std::span<double> p, std::span<const double> g, std::span<double> m,
                std::span<double> v, double lr, double b1, double b2, double eps,
                double bc1, double bc2) {
    for (size_t i = 0; i < p.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

} // namespace

void adam_step(MlpNet& net, const MlpGrads& grads, AdamState& state) {
    if (grads.layers.size() != net.weights.size() || state.mw.size() != net.weights.size())
        throw ShapeError("adam_step: layer count mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t l = 0; l < net.weights.size(); ++l) {
        if (!net.weights[l].same_shape(grads.layers[l].dw) ||
            net.biases[l].size() != grads.layers[l].db.size())
            throw ShapeError("adam_step: gradient shape mismatch");
        adam_apply(net.weights[l].v, grads.layers[l].dw.v, state.mw[l].v, state.vw[l].v,
                   state.lr, state.beta1, state.beta2, state.eps, bc1, bc2);
        adam_apply(net.biases[l], grads.layers[l].db, state.mb[l], state.vb[l],
                   state.lr, state.beta1, state.beta2, state.eps, bc1, bc2);
    }
}

void adam_step(double& param, double grad, ScalarAdamState& state) {
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad;
    const double mhat = state.m / (1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
    const double vhat = state.v / (1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
    param -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
}

void polyak_update(MlpNet& target, const MlpNet& online, double rho) {
    if (!target.same_arch(online)) throw ShapeError("polyak_update: architecture mismatch");
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("polyak_update: rho outside [0,1]");
    if (rho == 1.0) return;
    // rho*t + (1-rho)*o evaluated as o + rho*(t-o): exact at the fixed point.
    for (size_t l = 0; l < target.weights.size(); ++l) {
        auto& tw = target.weights[l].v;
        const auto& ow = online.weights[l].v;
        for (size_t i = 0; i < tw.size(); ++i)
            tw[i] = rho == 0.0 ? ow[i] : ow[i] + rho * (tw[i] - ow[i]);
        auto& tb = target.biases[l];
        const auto& ob = online.biases[l];
        for (size_t i = 0; i < tb.size(); ++i)
            tb[i] = rho == 0.0 ? ob[i] : ob[i] + rho * (tb[i] - ob[i]);
    }
}

void to_json(nlohmann::json& j, const MlpNet& net) {
    j = nlohmann::json{{"format", "symq.mlp.v1"},
                       {"layer_sizes", net.layer_sizes},
                       {"weights", nlohmann::json::array()},
                       {"biases", net.biases}};
    for (const auto& w : net.weights) j["weights"].push_back(w.v);
}

void from_json(const nlohmann::json& j, MlpNet& net) {
    if (j.value("format", "") != "symq.mlp.v1") throw DataError("MlpNet: unknown format tag");
    net = MlpNet(j.at("layer_sizes").get<std::vector<int>>());
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    if (jw.size() != net.weights.size() || jb.size() != net.biases.size())
        throw DataError("MlpNet: layer count mismatch in payload");
    for (size_t l = 0; l < net.weights.size(); ++l) {
        auto wv = jw[l].get<std::vector<double>>();
        if (wv.size() != net.weights[l].v.size()) throw DataError("MlpNet: weight size mismatch");
        net.weights[l].v = std::move(wv);
        auto bv = jb[l].get<std::vector<double>>();
        if (bv.size() != net.biases[l].size()) throw DataError("MlpNet: bias size mismatch");
        net.biases[l] = std::move(bv);
    }
}

} // namespace symq
