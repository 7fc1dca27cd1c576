#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "symq/error.hpp"
#include "symq/mlp.hpp"
#include "symq/rng.hpp"

using namespace symq;

namespace {

// Scalar loss L = sum_{n,o} U[n][o] * out[n][o]; its parameter gradient is
// what backward() returns for upstream U.
double loss_for(const MlpNet& net, const Matrix& x, const Matrix& u) {
    ForwardCache cache;
    forward(net, x, cache);
    double L = 0.0;
    for (size_t i = 0; i < u.v.size(); ++i) L += u.v[i] * cache.output().v[i];
    return L;
}

double fd_grad(MlpNet& net, double& param, const Matrix& x, const Matrix& u, double h) {
    const double saved = param;
    param = saved + h;
    const double hi = loss_for(net, x, u);
    param = saved - h;
    const double lo = loss_for(net, x, u);
    param = saved;
    return (hi - lo) / (2.0 * h);
}

bool grads_close(double fd, double bp) {
    return std::abs(fd - bp) <= 1e-4 * std::max({1e-4, std::abs(fd), std::abs(bp)});
}

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.v) x = rng.normal();
    return m;
}

} // namespace

TEST_CASE("forward trivial nets") {
    MlpNet zero({3, 4, 2});
    const std::vector<double> x{0.5, -1.0, 2.0};
    const auto out = forward(zero, x);
    CHECK(out == std::vector<double>{0.0, 0.0});

    MlpNet ident({2, 2});
    ident.weights[0].at(0, 0) = 1.0;
    ident.weights[0].at(1, 1) = 1.0;
    const std::vector<double> y{-3.5, 7.25};
    CHECK(forward(ident, y) == y);
}

TEST_CASE("forward 2-3-1 hand-arithmetic case") {
    MlpNet net({2, 3, 1});
    net.weights[0].v = {1.0, -1.0, 0.5, 0.5, 2.0, 0.0};
    net.biases[0] = {0.1, -0.2, 0.3};
    net.weights[1].v = {1.0, 2.0, -0.5};
    net.biases[1] = {0.25};
    // pre = [-0.9, 1.3, 2.3] -> relu [0, 1.3, 2.3]
    // out = 0*1 + 1.3*2 - 2.3*0.5 + 0.25 = 1.7
    const std::vector<double> x{1.0, 2.0};
    CHECK(forward(net, x)[0] == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("forward rejects wrong input width") {
    MlpNet net({3, 2});
    Matrix x(1, 4);
    ForwardCache cache;
    CHECK_THROWS_AS(forward(net, x, cache), ShapeError);
}

TEST_CASE("backward matches central finite differences on 4-8-8-1 nets") {
    const double h = 1e-5;
    for (uint64_t trial = 0; trial < 20; ++trial) {
        Rng rng(1000 + trial);
        MlpNet net = MlpNet::init({4, 8, 8, 1}, rng);
        const Matrix x = random_matrix(3, 4, rng);
        const Matrix u = random_matrix(3, 1, rng);

        ForwardCache cache;
        forward(net, x, cache);
        MlpGrads grads = MlpGrads::zeros_like(net);
        Matrix dinput;
        backward(net, cache, u, grads, &dinput);

        for (int l = 0; l < net.num_layers(); ++l) {
            auto& w = net.weights[static_cast<size_t>(l)];
            for (size_t i = 0; i < w.v.size(); ++i) {
                const double fd = fd_grad(net, w.v[i], x, u, h);
                CHECK(grads_close(fd, grads.layers[static_cast<size_t>(l)].dw.v[i]));
            }
            auto& b = net.biases[static_cast<size_t>(l)];
            for (size_t i = 0; i < b.size(); ++i) {
                const double fd = fd_grad(net, b[i], x, u, h);
                CHECK(grads_close(fd, grads.layers[static_cast<size_t>(l)].db[i]));
            }
        }

        // Input gradient against the same oracle.
        Matrix xm = x;
        for (size_t i = 0; i < xm.v.size(); ++i) {
            const double saved = xm.v[i];
            xm.v[i] = saved + h;
            const double hi = loss_for(net, xm, u);
            xm.v[i] = saved - h;
            const double lo = loss_for(net, xm, u);
            xm.v[i] = saved;
            CHECK(grads_close((hi - lo) / (2.0 * h), dinput.v[i]));
        }
    }
}

TEST_CASE("backward trivial cases") {
    Rng rng(7);
    MlpNet net = MlpNet::init({3, 5, 2}, rng);
    const Matrix x = random_matrix(4, 3, rng);
    ForwardCache cache;
    forward(net, x, cache);

    Matrix zero_u(4, 2);
    MlpGrads grads = MlpGrads::zeros_like(net);
    backward(net, cache, zero_u, grads);
    for (const auto& layer : grads.layers) {
        for (double g : layer.dw.v) CHECK(g == 0.0);
        for (double g : layer.db) CHECK(g == 0.0);
    }

    // Single linear layer: dW = upstream^T x (outer product), db = upstream.
    MlpNet lin = MlpNet::init({3, 2}, rng);
    Matrix x1 = random_matrix(1, 3, rng);
    Matrix u1 = random_matrix(1, 2, rng);
    ForwardCache c1;
    forward(lin, x1, c1);
    MlpGrads g1 = MlpGrads::zeros_like(lin);
    backward(lin, c1, u1, g1);
    for (int o = 0; o < 2; ++o) {
        CHECK(g1.layers[0].db[static_cast<size_t>(o)] == u1.at(0, o));
        for (int i = 0; i < 3; ++i)
            CHECK(g1.layers[0].dw.at(o, i) == doctest::Approx(u1.at(0, o) * x1.at(0, i)).epsilon(1e-12));
    }
}

TEST_CASE("forward and backward are bit-stable within a process") {
    Rng rng(11);
    MlpNet net = MlpNet::init({4, 16, 16, 2}, rng);
    const Matrix x = random_matrix(8, 4, rng);
    const Matrix u = random_matrix(8, 2, rng);
    ForwardCache c1, c2;
    forward(net, x, c1);
    forward(net, x, c2);
    CHECK(c1.output().v == c2.output().v);
    MlpGrads g1 = MlpGrads::zeros_like(net), g2 = MlpGrads::zeros_like(net);
    backward(net, c1, u, g1);
    backward(net, c2, u, g2);
    for (size_t l = 0; l < g1.layers.size(); ++l) {
        CHECK(g1.layers[l].dw.v == g2.layers[l].dw.v);
        CHECK(g1.layers[l].db == g2.layers[l].db);
    }
}

TEST_CASE("adam zero gradient leaves parameters, increments step") {
    Rng rng(13);
    MlpNet net = MlpNet::init({2, 3, 1}, rng);
    const MlpNet before = net;
    AdamState st = AdamState::make(net, 3e-4);
    MlpGrads zeros = MlpGrads::zeros_like(net);
    adam_step(net, zeros, st);
    CHECK(st.step == 1);
    for (size_t l = 0; l < net.weights.size(); ++l) {
        CHECK(net.weights[l].v == before.weights[l].v);
        CHECK(net.biases[l] == before.biases[l]);
    }
}

TEST_CASE("adam scalar oracle: one step on f(w)=w^2 moves w by about lr") {
    MlpNet net({1, 1});
    net.weights[0].v = {1.0};
    AdamState st = AdamState::make(net, 0.1);
    MlpGrads g = MlpGrads::zeros_like(net);
    g.layers[0].dw.v = {2.0}; // d(w^2)/dw at w=1
    adam_step(net, g, st);
    // bias-corrected: mhat=2, vhat=4 -> step = lr * 2/(2+eps) ~= lr
    CHECK(std::abs(net.weights[0].v[0] - 0.9) <= 1e-8);
}

TEST_CASE("adam drives a convex quadratic down monotonically") {
    MlpNet net({1, 1});
    net.weights[0].v = {0.0};
    AdamState st = AdamState::make(net, 0.05);
    auto loss = [&] { const double d = net.weights[0].v[0] - 3.0; return d * d; };
    double prev = loss();
    const double first = prev;
    for (int t = 0; t < 40; ++t) {
        MlpGrads g = MlpGrads::zeros_like(net);
        g.layers[0].dw.v = {2.0 * (net.weights[0].v[0] - 3.0)};
        adam_step(net, g, st);
        const double cur = loss();
        if (t >= 5) CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
    CHECK(prev < first / 4.0);
}

TEST_CASE("polyak update") {
    Rng rng(17);
    MlpNet online = MlpNet::init({2, 4, 1}, rng);
    MlpNet target({2, 4, 1});

    SUBCASE("rho=0 copies online") {
        polyak_update(target, online, 0.0);
        for (size_t l = 0; l < online.weights.size(); ++l)
            CHECK(target.weights[l].v == online.weights[l].v);
    }
    SUBCASE("rho=1 keeps target") {
        const MlpNet before = target;
        polyak_update(target, online, 1.0);
        for (size_t l = 0; l < before.weights.size(); ++l)
            CHECK(target.weights[l].v == before.weights[l].v);
    }
    SUBCASE("rho=0.005 from zero toward ones gives 0.995") {
        MlpNet ones({2, 4, 1});
        for (auto& w : ones.weights) w.fill(1.0);
        for (auto& b : ones.biases) std::fill(b.begin(), b.end(), 1.0);
        polyak_update(target, ones, 0.005);
        for (const auto& w : target.weights)
            for (double x : w.v) CHECK(x == doctest::Approx(0.995).epsilon(1e-15));
    }
    SUBCASE("fixed point: target == online is invariant for any rho") {
        MlpNet copy = online;
        for (double rho : {0.0, 0.3, 0.777, 1.0}) {
            polyak_update(copy, online, rho);
            for (size_t l = 0; l < online.weights.size(); ++l) {
                CHECK(copy.weights[l].v == online.weights[l].v);
                CHECK(copy.biases[l] == online.biases[l]);
            }
        }
    }
    SUBCASE("architecture mismatch rejected") {
        MlpNet other({2, 5, 1});
        CHECK_THROWS_AS(polyak_update(other, online, 0.5), ShapeError);
    }
}

TEST_CASE("mlp json round trip") {
    Rng rng(23);
    MlpNet net = MlpNet::init({3, 8, 8, 2}, rng);
    nlohmann::json j;
    to_json(j, net);
    MlpNet back;
    from_json(j, back);
    CHECK(back.layer_sizes == net.layer_sizes);
    for (size_t l = 0; l < net.weights.size(); ++l) {
        CHECK(back.weights[l].v == net.weights[l].v);
        CHECK(back.biases[l] == net.biases[l]);
    }
    nlohmann::json bad = j;
    bad["format"] = "something.else";
    CHECK_THROWS_AS(from_json(bad, back), DataError);
}
