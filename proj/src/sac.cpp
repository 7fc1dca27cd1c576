#include "symq/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "symq/error.hpp"

namespace symq {

namespace {

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.91893853320467274178; // (1/2) ln(2 pi)

double softplus(double x) {
    // log(1 + e^x) without overflow
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)), stable for large |u|.
double log_one_minus_tanh_sq(double u) {
    return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

Matrix obs_matrix(const std::vector<Transition>& batch, bool next) {
    const int b = static_cast<int>(batch.size());
    const int dim = static_cast<int>(batch.front().state.size());
    Matrix m(b, dim);
    for (int i = 0; i < b; ++i) {
        const auto& src = next ? batch[static_cast<size_t>(i)].next_state
                               : batch[static_cast<size_t>(i)].state;
        std::copy(src.begin(), src.end(), m.row(i));
    }
    return m;
}

Matrix critic_input(const Matrix& obs, const Matrix& action) {
    Matrix x(obs.rows, obs.cols + action.cols);
    for (int i = 0; i < obs.rows; ++i) {
        std::copy(obs.row(i), obs.row(i) + obs.cols, x.row(i));
        std::copy(action.row(i), action.row(i) + action.cols, x.row(i) + obs.cols);
    }
    return x;
}

Matrix stored_critic_input(const std::vector<Transition>& batch) {
    const int b = static_cast<int>(batch.size());
    const int sdim = static_cast<int>(batch.front().state.size());
    const int adim = static_cast<int>(batch.front().action.size());
    Matrix x(b, sdim + adim);
    for (int i = 0; i < b; ++i) {
        const auto& t = batch[static_cast<size_t>(i)];
        std::copy(t.state.begin(), t.state.end(), x.row(i));
        std::copy(t.action.begin(), t.action.end(), x.row(i) + sdim);
    }
    return x;
}

} // namespace

PolicyNet PolicyNet::init(int obs_dim, int action_dim, const std::vector<int>& hidden,
                          std::span<const double> action_low, std::span<const double> action_high,
                          Rng& rng) {
    if (action_dim < 1) throw ConfigError("PolicyNet: action_dim must be positive");
    if (action_low.size() != static_cast<size_t>(action_dim) ||
        action_high.size() != static_cast<size_t>(action_dim))
        throw ShapeError("PolicyNet: action bound sizes");
    std::vector<int> sizes{obs_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2 * action_dim);

    PolicyNet p;
    p.net = MlpNet::init(std::move(sizes), rng);
    p.action_dim = action_dim;
    for (int j = 0; j < action_dim; ++j) {
        const double lo = action_low[static_cast<size_t>(j)];
        const double hi = action_high[static_cast<size_t>(j)];
        if (!(lo < hi)) throw ConfigError("PolicyNet: action_low must be < action_high");
        p.action_scale.push_back(0.5 * (hi - lo));
        p.action_offset.push_back(0.5 * (hi + lo));
    }
    return p;
}

CriticEnsemble CriticEnsemble::init(int n, int obs_dim, int action_dim,
                                    const std::vector<int>& hidden, Rng& rng) {
    if (n < 1) throw ConfigError("CriticEnsemble: need N >= 1");
    std::vector<int> sizes{obs_dim + action_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);

    CriticEnsemble e;
    for (int i = 0; i < n; ++i) e.online.push_back(MlpNet::init(sizes, rng));
    e.target = e.online;
    return e;
}

void CriticEnsemble::polyak(double rho) {
    for (size_t i = 0; i < online.size(); ++i) polyak_update(target[i], online[i], rho);
}

double EntropyTemp::alpha() const { return std::exp(log_alpha); }

void policy_sample_batch(const PolicyNet& policy, const Matrix& obs, Rng& rng,
                         PolicySample& out) {
    for (double x : obs.v)
        if (!std::isfinite(x)) throw DataError("policy_sample: non-finite observation");

    const int b = obs.rows;
    const int a = policy.action_dim;
    forward(policy.net, obs, out.cache);
    const Matrix& head = out.cache.output(); // B x 2A

    out.mean = Matrix(b, a);
    out.log_std = Matrix(b, a);
    out.clamp_mask = Matrix(b, a);
    out.std = Matrix(b, a);
    out.z = Matrix(b, a);
    out.u = Matrix(b, a);
    out.t = Matrix(b, a);
    out.action = Matrix(b, a);
    out.log_prob.assign(static_cast<size_t>(b), 0.0);

    for (int i = 0; i < b; ++i) {
        double logp = 0.0;
        for (int j = 0; j < a; ++j) {
            const double mu = head.at(i, j);
            const double raw = head.at(i, a + j);
            const bool inside = raw > kLogStdMin && raw < kLogStdMax;
            const double ls = std::clamp(raw, kLogStdMin, kLogStdMax);
            const double sd = std::exp(ls);
            const double z = rng.normal();
            const double u = mu + sd * z;
            const double t = std::tanh(u);

            out.mean.at(i, j) = mu;
            out.log_std.at(i, j) = ls;
            out.clamp_mask.at(i, j) = inside ? 1.0 : 0.0;
            out.std.at(i, j) = sd;
            out.z.at(i, j) = z;
            out.u.at(i, j) = u;
            out.t.at(i, j) = t;
            out.action.at(i, j) =
                t * policy.action_scale[static_cast<size_t>(j)] +
                policy.action_offset[static_cast<size_t>(j)];

            logp += -0.5 * z * z - ls - kHalfLog2Pi;
            logp -= log_one_minus_tanh_sq(u);
            logp -= std::log(policy.action_scale[static_cast<size_t>(j)]);
        }
        out.log_prob[static_cast<size_t>(i)] = logp;
    }
}

std::pair<std::vector<double>, double> policy_sample(const PolicyNet& policy,
                                                     std::span<const double> obs, Rng& rng) {
    Matrix m(1, static_cast<int>(obs.size()));
    std::copy(obs.begin(), obs.end(), m.v.begin());
    PolicySample s;
    policy_sample_batch(policy, m, rng, s);
    return {s.action.v, s.log_prob[0]};
}

std::vector<double> policy_mean_action(const PolicyNet& policy, std::span<const double> obs) {
    const auto head = forward(policy.net, obs);
    std::vector<double> action(static_cast<size_t>(policy.action_dim));
    for (int j = 0; j < policy.action_dim; ++j)
        action[static_cast<size_t>(j)] =
            std::tanh(head[static_cast<size_t>(j)]) * policy.action_scale[static_cast<size_t>(j)] +
            policy.action_offset[static_cast<size_t>(j)];
    return action;
}

std::vector<double> compute_target(const CriticEnsemble& ensemble, const PolicyNet& policy,
                                   const EntropyTemp& temp, const std::vector<Transition>& batch,
                                   std::span<const int> subset, double gamma, Rng& rng) {
    if (batch.empty()) throw ConfigError("compute_target: empty batch");
    if (subset.empty()) throw ConfigError("compute_target: empty critic subset");
    for (int i : subset)
        if (i < 0 || i >= ensemble.N()) throw ConfigError("compute_target: subset index out of range");

    const Matrix next_obs = obs_matrix(batch, true);
    PolicySample next_action;
    policy_sample_batch(policy, next_obs, rng, next_action);

    const Matrix x = critic_input(next_obs, next_action.action);
    const int b = x.rows;
    std::vector<double> min_q(static_cast<size_t>(b), 0.0);
    bool first = true;
    ForwardCache cache;
    for (int i : subset) {
        forward(ensemble.target[static_cast<size_t>(i)], x, cache);
        const Matrix& q = cache.output();
        for (int n = 0; n < b; ++n) {
            if (first) {
                min_q[static_cast<size_t>(n)] = q.at(n, 0);
            } else {
                min_q[static_cast<size_t>(n)] =
                    std::min(min_q[static_cast<size_t>(n)], q.at(n, 0));
            }
        }
        first = false;
    }

    const double alpha = temp.alpha();
    std::vector<double> y(static_cast<size_t>(b));
    for (int n = 0; n < b; ++n) {
        const auto& tr = batch[static_cast<size_t>(n)];
        const double done = tr.done ? 1.0 : 0.0;
        const double logp = next_action.log_prob[static_cast<size_t>(n)];
        y[static_cast<size_t>(n)] =
            tr.reward + gamma * (1.0 - done) * (min_q[static_cast<size_t>(n)] - alpha * logp);
    }
    return y;
}

std::vector<double> critic_values(const MlpNet& critic, const std::vector<Transition>& batch) {
    if (batch.empty()) throw ConfigError("critic_values: empty batch");
    ForwardCache cache;
    forward(critic, stored_critic_input(batch), cache);
    return cache.output().v;
}

Matrix bellman_errors(const CriticEnsemble& ensemble, const std::vector<Transition>& batch,
                      std::span<const double> y) {
    if (y.size() != batch.size()) throw ShapeError("bellman_errors: y length mismatch");
    Matrix errors(static_cast<int>(batch.size()), ensemble.N());
    const Matrix x = stored_critic_input(batch);
    ForwardCache cache;
    for (int i = 0; i < ensemble.N(); ++i) {
        forward(ensemble.online[static_cast<size_t>(i)], x, cache);
        for (int n = 0; n < errors.rows; ++n)
            errors.at(n, i) = y[static_cast<size_t>(n)] - cache.output().at(n, 0);
    }
    return errors;
}

double critic_gradients(const MlpNet& critic, const std::vector<Transition>& batch,
                        std::span<const double> y, std::span<const double> eta, MlpGrads& grads) {
    const auto b = batch.size();
    if (y.size() != b || eta.size() != b) throw ShapeError("critic_gradients: length mismatch");

    ForwardCache cache;
    forward(critic, stored_critic_input(batch), cache);
    const Matrix& q = cache.output();

    // L = (1/B) sum (y - Q + eta)^2, dL/dQ = -(2/B)(y - Q + eta)
    Matrix upstream(static_cast<int>(b), 1);
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(b);
    for (size_t n = 0; n < b; ++n) {
        const double delta = y[n] - q.at(static_cast<int>(n), 0) + eta[n];
        loss += delta * delta * inv_b;
        upstream.at(static_cast<int>(n), 0) = -2.0 * delta * inv_b;
    }
    backward(critic, cache, upstream, grads);
    return loss;
}

std::vector<double> critic_update(CriticEnsemble& ensemble, const std::vector<Transition>& batch,
                                  std::span<const double> y, const Matrix& eta_bn,
                                  std::vector<AdamState>& states) {
    if (states.size() != ensemble.online.size())
        throw ShapeError("critic_update: one Adam state per critic required");
    if (eta_bn.rows != static_cast<int>(batch.size()) || eta_bn.cols != ensemble.N())
        throw ShapeError("critic_update: eta shape mismatch");

    std::vector<double> losses(ensemble.online.size());
    std::vector<double> eta_col(batch.size());
    for (int i = 0; i < ensemble.N(); ++i) {
        for (int n = 0; n < eta_bn.rows; ++n) eta_col[static_cast<size_t>(n)] = eta_bn.at(n, i);
        MlpGrads grads = MlpGrads::zeros_like(ensemble.online[static_cast<size_t>(i)]);
        losses[static_cast<size_t>(i)] =
            critic_gradients(ensemble.online[static_cast<size_t>(i)], batch, y, eta_col, grads);
        adam_step(ensemble.online[static_cast<size_t>(i)], grads, states[static_cast<size_t>(i)]);
    }
    return losses;
}

std::vector<double> critic_update(CriticEnsemble& ensemble, const std::vector<Transition>& batch,
                                  std::span<const double> y, std::span<const double> eta,
                                  std::vector<AdamState>& states) {
    if (eta.size() != batch.size()) throw ShapeError("critic_update: eta length mismatch");
    Matrix eta_bn(static_cast<int>(batch.size()), ensemble.N());
    for (int n = 0; n < eta_bn.rows; ++n)
        for (int i = 0; i < eta_bn.cols; ++i) eta_bn.at(n, i) = eta[static_cast<size_t>(n)];
    return critic_update(ensemble, batch, y, eta_bn, states);
}

double policy_gradients(const PolicyNet& policy, const CriticEnsemble& ensemble,
                        const EntropyTemp& temp, const std::vector<Transition>& batch, Rng& rng,
                        MlpGrads& grads, std::vector<double>* log_probs_out) {
    if (batch.empty()) throw ConfigError("policy_gradients: empty batch");
    const Matrix obs = obs_matrix(batch, false);
    const int b = obs.rows;
    const int a = policy.action_dim;
    const double alpha = temp.alpha();
    const double inv_b = 1.0 / static_cast<double>(b);
    const double inv_n = 1.0 / static_cast<double>(ensemble.N());

    PolicySample s;
    policy_sample_batch(policy, obs, rng, s);

    // Mean over critics of dQ_i/da at (obs, a(s)), and the loss value.
    const Matrix x = critic_input(obs, s.action);
    Matrix q_grad(b, a);
    double mean_q = 0.0;
    Matrix upstream_q(b, 1);
    upstream_q.fill(1.0);
    ForwardCache cache;
    for (int i = 0; i < ensemble.N(); ++i) {
        const MlpNet& critic = ensemble.online[static_cast<size_t>(i)];
        forward(critic, x, cache);
        for (int n = 0; n < b; ++n) mean_q += cache.output().at(n, 0) * inv_n * inv_b;
        MlpGrads unused = MlpGrads::zeros_like(critic);
        Matrix dx;
        backward(critic, cache, upstream_q, unused, &dx);
        for (int n = 0; n < b; ++n)
            for (int j = 0; j < a; ++j) q_grad.at(n, j) += dx.at(n, obs.cols + j) * inv_n;
    }

    double mean_logp = 0.0;
    for (double lp : s.log_prob) mean_logp += lp * inv_b;
    const double loss = alpha * mean_logp - mean_q;
    if (log_probs_out) *log_probs_out = s.log_prob;

    // Head gradients. L = (1/B) sum_b [alpha log pi(a_b|s_b) - Qbar(s_b, a_b)],
    // a = tanh(u) * scale + offset, u = mu + sigma z with z held fixed:
    //   dL/du = (-Qbar_a * scale) (1 - t^2) + alpha * 2t
    //   dL/dmu = dL/du
    //   dL/dlogstd_raw = (dL/du * sigma z - alpha) * [raw inside clamp]
    Matrix upstream(b, 2 * a);
    for (int n = 0; n < b; ++n) {
        for (int j = 0; j < a; ++j) {
            const double t = s.t.at(n, j);
            const double sech2 = 1.0 - t * t;
            const double dl_du =
                -q_grad.at(n, j) * policy.action_scale[static_cast<size_t>(j)] * sech2 +
                alpha * 2.0 * t;
            upstream.at(n, j) = dl_du * inv_b;
            upstream.at(n, a + j) = (dl_du * s.std.at(n, j) * s.z.at(n, j) - alpha) * inv_b *
                                    s.clamp_mask.at(n, j);
        }
    }
    backward(policy.net, s.cache, upstream, grads);
    return loss;
}

double policy_update(PolicyNet& policy, const CriticEnsemble& ensemble, const EntropyTemp& temp,
                     const std::vector<Transition>& batch, AdamState& state, Rng& rng,
                     std::vector<double>* log_probs_out) {
    MlpGrads grads = MlpGrads::zeros_like(policy.net);
    const double loss = policy_gradients(policy, ensemble, temp, batch, rng, grads, log_probs_out);
    adam_step(policy.net, grads, state);
    return loss;
}

double temperature_update(EntropyTemp& temp, std::span<const double> log_probs,
                          ScalarAdamState& state) {
    double mean_gap = 0.0;
    for (double lp : log_probs) mean_gap += lp + temp.target_entropy;
    if (!log_probs.empty()) mean_gap /= static_cast<double>(log_probs.size());
    // J(alpha) = -alpha * mean(log pi + target_entropy); in log-alpha space
    // dJ/dlog_alpha = -alpha * mean_gap.
    const double grad = -temp.alpha() * mean_gap;
    adam_step(temp.log_alpha, grad, state);
    return temp.alpha();
}

} // namespace symq
