#pragma once

#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "symq/rng.hpp"

namespace symq {

// One-dimensional variational-Bayes Gaussian mixture. Each cluster k carries
// a Dirichlet weight alpha_k, a mean-precision scale beta_k, Wishart degrees
// of freedom nu_k, a mean location m_k, and a Wishart scale w_k (D = 1).
// update() runs one E-step + M-step on a data batch and then re-centers the
// mixture mean at zero; counts accumulate across calls (no forgetting).
class GmmModel {
  public:
    std::vector<double> alpha, beta, nu, m, w;

    // Priors alpha0=1, beta0=1, nu0=3, w0=1/3. Cluster centers are k points
    // sampled from seed_data, or spread uniformly over its range when it has
    // fewer than k points (over [-1,1] when empty).
    static GmmModel init(int k, std::span<const double> seed_data, Rng& rng);

    int K() const { return static_cast<int>(alpha.size()); }

    // pi_k = alpha_k / sum(alpha).
    std::vector<double> mixture_weights() const;
    // sum_k pi_k m_k.
    double mixture_mean() const;
    // Plug-in per-cluster variance 1 / (nu_k w_k).
    double cluster_variance(int k) const;

    // One Alg.-2 update pass on the batch, followed by zero_shift.
    void update(std::span<const double> data);

    // m_k <- m_k - sum_j pi_j m_j.
    void zero_shift();

    // Noise draws: cluster ~ Categorical(pi), value ~ N(m_k, 1/(nu_k w_k)).
    double sample_one(Rng& rng) const;
    std::vector<double> sample(Rng& rng, int n) const;

    // update() on the negated errors.
    void fit_to_negated_errors(std::span<const double> errors);

    // Positivity / normalization invariants; throws StateError on violation.
    void validate() const;
};

void to_json(nlohmann::json& j, const GmmModel& model);
void from_json(const nlohmann::json& j, GmmModel& model);

} // namespace symq
