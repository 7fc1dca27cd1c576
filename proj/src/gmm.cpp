#include "symq/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "symq/error.hpp"
#include "symq/kernels.hpp"
#include "symq/matrix.hpp"
#include "symq/special.hpp"

namespace symq {

namespace {
constexpr double kAlpha0 = 1.0;
constexpr double kBeta0 = 1.0;
constexpr double kNu0 = 3.0; // D + 2
constexpr double kW0 = 1.0 / kNu0;
constexpr double kEmptyCluster = 1e-8;
} // namespace

GmmModel GmmModel::init(int k, std::span<const double> seed_data, Rng& rng) {
    if (k < 1) throw ConfigError("GmmModel::init: need K >= 1");
    GmmModel model;
    const auto kk = static_cast<size_t>(k);
    model.alpha.assign(kk, kAlpha0);
    model.beta.assign(kk, kBeta0);
    model.nu.assign(kk, kNu0);
    model.w.assign(kk, kW0);
    model.m.assign(kk, 0.0);

    if (seed_data.size() >= kk) {
        const auto picks = rng.sample_indices(static_cast<int>(seed_data.size()), k);
        for (size_t i = 0; i < kk; ++i) model.m[i] = seed_data[static_cast<size_t>(picks[i])];
    } else {
        double lo = -1.0, hi = 1.0;
        if (!seed_data.empty()) {
            lo = *std::min_element(seed_data.begin(), seed_data.end());
            hi = *std::max_element(seed_data.begin(), seed_data.end());
        }
        for (size_t i = 0; i < kk; ++i)
            model.m[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    }
    return model;
}

std::vector<double> GmmModel::mixture_weights() const {
    double total = 0.0;
    for (double a : alpha) total += a;
    std::vector<double> pi(alpha.size());
    for (size_t i = 0; i < alpha.size(); ++i) pi[i] = alpha[i] / total;
    return pi;
}

double GmmModel::mixture_mean() const {
    const auto pi = mixture_weights();
    double mean = 0.0;
    for (size_t i = 0; i < pi.size(); ++i) mean += pi[i] * m[i];
    return mean;
}

double GmmModel::cluster_variance(int k) const {
    const auto i = static_cast<size_t>(k);
    return 1.0 / (nu[i] * w[i]);
}

void GmmModel::update(std::span<const double> data) {
    if (data.empty()) throw DataError("GmmModel::update: empty data");
    for (double x : data)
        if (!std::isfinite(x)) throw DataError("GmmModel::update: non-finite data");

    const int n = static_cast<int>(data.size());
    const int k_count = K();
    const auto kk = static_cast<size_t>(k_count);

    // E-step in log space: log rho_nk = ln pi~_k + (1/2) ln Lambda~_k
    //   - D/(2 beta_k) - (nu_k/2) W_k (x_n - m_k)^2, D = 1.
    double alpha_sum = 0.0;
    for (double a : alpha) alpha_sum += a;
    const double psi_alpha_sum = digamma(alpha_sum);
    std::vector<double> log_coef(kk), half_prec(kk);
    for (size_t k = 0; k < kk; ++k) {
        const double log_pi = digamma(alpha[k]) - psi_alpha_sum;
        const double log_lambda = digamma(0.5 * nu[k]) + std::numbers::ln2 + std::log(w[k]);
        log_coef[k] = log_pi + 0.5 * log_lambda - 0.5 / beta[k];
        half_prec[k] = 0.5 * nu[k] * w[k];
    }
    Matrix r(n, k_count);
    kernels::gauss_log_responsibilities(data, log_coef, half_prec, m, r);

    // M-step statistics.
    for (size_t k = 0; k < kk; ++k) {
        double nk = 0.0, sx = 0.0;
        for (int i = 0; i < n; ++i) {
            nk += r.at(i, static_cast<int>(k));
            sx += r.at(i, static_cast<int>(k)) * data[static_cast<size_t>(i)];
        }
        double xbar = m[k], s = 0.0;
        if (nk >= kEmptyCluster) {
            xbar = sx / nk;
            for (int i = 0; i < n; ++i) {
                const double d = data[static_cast<size_t>(i)] - xbar;
                s += r.at(i, static_cast<int>(k)) * d * d;
            }
            s /= nk;
        }
        const double beta_new = beta[k] + nk;
        const double w_inv =
            1.0 / w[k] + nk * s + (beta[k] * nk / (beta[k] + nk)) * (xbar - m[k]) * (xbar - m[k]);
        alpha[k] += nk;
        nu[k] += nk;
        m[k] = (beta[k] * m[k] + nk * xbar) / beta_new;
        beta[k] = beta_new;
        w[k] = 1.0 / w_inv;
    }
    zero_shift();
}

void GmmModel::zero_shift() {
    const double mean = mixture_mean();
    for (double& mk : m) mk -= mean;
}

double GmmModel::sample_one(Rng& rng) const {
    const auto pi = mixture_weights();
    const auto k = rng.categorical(pi);
    return rng.normal(m[k], std::sqrt(1.0 / (nu[k] * w[k])));
}

std::vector<double> GmmModel::sample(Rng& rng, int n) const {
    if (n < 0) throw ConfigError("GmmModel::sample: need n >= 0");
    std::vector<double> out(static_cast<size_t>(n));
    for (double& x : out) x = sample_one(rng);
    return out;
}

void GmmModel::fit_to_negated_errors(std::span<const double> errors) {
    std::vector<double> neg(errors.size());
    for (size_t i = 0; i < errors.size(); ++i) neg[i] = -errors[i];
    update(neg);
}

void GmmModel::validate() const {
    const size_t kk = alpha.size();
    if (kk == 0 || beta.size() != kk || nu.size() != kk || m.size() != kk || w.size() != kk)
        throw StateError("GmmModel: inconsistent parameter arrays");
    for (size_t k = 0; k < kk; ++k)
        if (!(alpha[k] > 0.0) || !(beta[k] > 0.0) || !(w[k] > 0.0) || !(nu[k] > 0.0) ||
            !std::isfinite(m[k]))
            throw StateError("GmmModel: parameter positivity violated");
}

void to_json(nlohmann::json& j, const GmmModel& model) {
    j = nlohmann::json{{"format", "symq.gmm.v1"}, {"K", model.K()},    {"alpha", model.alpha},
                       {"beta", model.beta},      {"nu", model.nu},    {"m", model.m},
                       {"w", model.w}};
}

void from_json(const nlohmann::json& j, GmmModel& model) {
    if (j.value("format", "") != "symq.gmm.v1") throw DataError("GmmModel: unknown format tag");
    model.alpha = j.at("alpha").get<std::vector<double>>();
    model.beta = j.at("beta").get<std::vector<double>>();
    model.nu = j.at("nu").get<std::vector<double>>();
    model.m = j.at("m").get<std::vector<double>>();
    model.w = j.at("w").get<std::vector<double>>();
    if (model.K() != j.at("K").get<int>()) throw DataError("GmmModel: K mismatch in payload");
    model.validate();
}

} // namespace symq
