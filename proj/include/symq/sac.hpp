#pragma once

#include <span>
#include <utility>
#include <vector>

#include "symq/matrix.hpp"
#include "symq/mlp.hpp"
#include "symq/replay.hpp"
#include "symq/rng.hpp"

namespace symq {

// Tanh-squashed Gaussian policy head. The net maps an observation to
// [mean, log_std] (2 * action_dim outputs); log_std is clamped to [-20, 2]
// before use. Actions are rescaled to the env bounds by scale/offset.
struct PolicyNet {
    MlpNet net;
    int action_dim = 0;
    std::vector<double> action_scale, action_offset;

    static PolicyNet init(int obs_dim, int action_dim, const std::vector<int>& hidden,
                          std::span<const double> action_low, std::span<const double> action_high,
                          Rng& rng);
};

struct CriticEnsemble {
    std::vector<MlpNet> online;
    std::vector<MlpNet> target;

    // N critics on (obs (+) action) -> scalar; targets start as copies.
    static CriticEnsemble init(int n, int obs_dim, int action_dim,
                               const std::vector<int>& hidden, Rng& rng);

    int N() const { return static_cast<int>(online.size()); }
    void polyak(double rho);
};

struct EntropyTemp {
    double log_alpha = 0.0;
    double target_entropy = 0.0; // -action_dim

    double alpha() const;
};

// Everything produced by one reparameterized draw per batch row, kept for
// backprop through the head.
struct PolicySample {
    ForwardCache cache;        // policy net forward
    Matrix mean, log_std, std; // B x A, log_std already clamped
    Matrix clamp_mask;         // 1 where the raw log_std was inside [-20, 2]
    Matrix z;                  // the N(0,1) draws
    Matrix u;                  // mean + std * z
    Matrix t;                  // tanh(u)
    Matrix action;             // t * scale + offset
    std::vector<double> log_prob;
};

// Draws one action per row of obs; consumes rng.normal() in row-major order.
void policy_sample_batch(const PolicyNet& policy, const Matrix& obs, Rng& rng,
                         PolicySample& out);

// Single-observation convenience wrapper.
std::pair<std::vector<double>, double> policy_sample(const PolicyNet& policy,
                                                     std::span<const double> obs, Rng& rng);

// Deterministic action tanh(mean) * scale + offset used for evaluation.
std::vector<double> policy_mean_action(const PolicyNet& policy, std::span<const double> obs);

// y_b = r + gamma * (1 - done) * (min_{i in subset} Qtarg_i(s', a') - alpha * log pi(a'|s'))
// with one fresh a' per batch row shared by every critic.
std::vector<double> compute_target(const CriticEnsemble& ensemble, const PolicyNet& policy,
                                   const EntropyTemp& temp, const std::vector<Transition>& batch,
                                   std::span<const int> subset, double gamma, Rng& rng);

// Q values of one critic on the stored (state, action) pairs.
std::vector<double> critic_values(const MlpNet& critic, const std::vector<Transition>& batch);

// errors[b][i] = y_b - Q_i(s_b, a_b) over the online critics.
Matrix bellman_errors(const CriticEnsemble& ensemble, const std::vector<Transition>& batch,
                      std::span<const double> y);

// Loss (1/B) sum_b (y_b - Q(s_b,a_b) + eta_b)^2 and its parameter gradients.
double critic_gradients(const MlpNet& critic, const std::vector<Transition>& batch,
                        std::span<const double> y, std::span<const double> eta, MlpGrads& grads);

// One Adam step per critic; eta_bn holds one noise value per (row, critic).
// Returns the per-critic losses before the step.
std::vector<double> critic_update(CriticEnsemble& ensemble, const std::vector<Transition>& batch,
                                  std::span<const double> y, const Matrix& eta_bn,
                                  std::vector<AdamState>& states);

// Same noise vector for every critic.
std::vector<double> critic_update(CriticEnsemble& ensemble, const std::vector<Transition>& batch,
                                  std::span<const double> y, std::span<const double> eta,
                                  std::vector<AdamState>& states);

// Loss -(1/B) sum_b ((1/N) sum_i Q_i(s, a(s)) - alpha log pi(a|s)) and its
// gradients w.r.t. the policy parameters (reparameterization trick).
double policy_gradients(const PolicyNet& policy, const CriticEnsemble& ensemble,
                        const EntropyTemp& temp, const std::vector<Transition>& batch, Rng& rng,
                        MlpGrads& grads, std::vector<double>* log_probs_out = nullptr);

// policy_gradients + one Adam step; returns the loss. When log_probs_out is
// given it receives the sampled log pi values (input to the temperature step).
double policy_update(PolicyNet& policy, const CriticEnsemble& ensemble, const EntropyTemp& temp,
                     const std::vector<Transition>& batch, AdamState& state, Rng& rng,
                     std::vector<double>* log_probs_out = nullptr);

// One Adam step on J(alpha) = -alpha * mean(log pi + target_entropy), taken
// in log-alpha space. Returns the new alpha.
double temperature_update(EntropyTemp& temp, std::span<const double> log_probs,
                          ScalarAdamState& state);

} // namespace symq
