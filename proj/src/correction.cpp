#include "symq/correction.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include <nlohmann/json.hpp>

#include "symq/error.hpp"
#include "symq/stats.hpp"

namespace symq {

void CorrectionConfig::validate() const {
    if (k < 1) throw ConfigError("correction k must be >= 1");
    if (clusters < 1) throw ConfigError("correction clusters must be >= 1");
}

SymCorrection::SymCorrection(CorrectionConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const GmmModel& SymCorrection::model() const {
    if (!model_) throw StateError("noise model not fitted yet");
    return *model_;
}

Matrix SymCorrection::collect_errors(const CriticEnsemble& ensemble,
                                     const std::vector<Transition>& batch,
                                     std::span<const double> y) {
    return bellman_errors(ensemble, batch, y);
}

bool SymCorrection::maybe_refresh(std::span<const double> pooled_errors,
                                  long long gradient_step, Rng& rng) {
    if (!cfg_.enabled) return false;
    if (gradient_step % cfg_.k != 0) return false;
    if (!model_) {
        std::vector<double> negated(pooled_errors.begin(), pooled_errors.end());
        for (double& v : negated) v = -v;
        model_ = GmmModel::init(cfg_.clusters, negated, rng);
    }
    model_->fit_to_negated_errors(pooled_errors);
    ++refresh_count_;
    return true;
}

std::vector<double> SymCorrection::draw_noise(int batch_size, int critic_index,
                                              Rng& rng) const {
    if (batch_size < 0) throw ConfigError("draw_noise batch_size must be >= 0");
    if (critic_index < 0) throw ConfigError("draw_noise critic_index must be >= 0");
    if (!cfg_.enabled || !model_) return std::vector<double>(static_cast<size_t>(batch_size), 0.0);
    return model_->sample(rng, batch_size);
}

namespace {

// NaN + degenerate flag instead of an exception, so one all-zero snapshot
// cannot abort a long run.
double stat_or_nan(double (*stat)(std::span<const double>),
                   std::span<const double> xs, bool& degenerate) {
    try {
        return stat(xs);
    } catch (const DegenerateSampleError&) {
        degenerate = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

ErrorSnapshot SymCorrection::snapshot(long long step, std::span<const double> pre_errors,
                                      std::span<const double> noise) {
    if (pre_errors.size() != noise.size())
        throw ShapeError("snapshot pre/noise length mismatch");
    ErrorSnapshot s;
    s.step = step;
    s.pre_errors.assign(pre_errors.begin(), pre_errors.end());
    s.noise.assign(noise.begin(), noise.end());
    s.post_errors.resize(pre_errors.size());
    for (size_t i = 0; i < pre_errors.size(); ++i)
        s.post_errors[i] = pre_errors[i] + noise[i];
    s.skew_pre = stat_or_nan(&skewness, s.pre_errors, s.degenerate);
    s.skew_post = stat_or_nan(&skewness, s.post_errors, s.degenerate);
    s.symmetry_pre = stat_or_nan(&symmetry_statistic, s.pre_errors, s.degenerate);
    s.symmetry_post = stat_or_nan(&symmetry_statistic, s.post_errors, s.degenerate);
    return s;
}

void SymCorrection::restore_model(GmmModel model) {
    model.validate();
    model_ = std::move(model);
}

void write_errors_csv_header(std::ostream& os) { os << "step,kind,value\n"; }

void append_snapshot_csv(std::ostream& os, const ErrorSnapshot& s) {
    os << std::setprecision(17);
    double pre_mean = 0.0, noise_mean = 0.0;
    if (!s.pre_errors.empty()) {
        for (double v : s.pre_errors) pre_mean += v;
        pre_mean /= static_cast<double>(s.pre_errors.size());
        for (double v : s.noise) noise_mean += v;
        noise_mean /= static_cast<double>(s.noise.size());
    }
    const double display_shift = pre_mean - noise_mean;
    for (double v : s.pre_errors) os << s.step << ",pre," << v << '\n';
    for (double v : s.noise) os << s.step << ",noise," << v + display_shift << '\n';
    for (double v : s.post_errors) os << s.step << ",post," << v << '\n';
}

nlohmann::json snapshot_summary(const ErrorSnapshot& s) {
    return nlohmann::json{{"step", s.step},
                          {"skew_pre", s.skew_pre},
                          {"skew_post", s.skew_post},
                          {"symmetry_pre", s.symmetry_pre},
                          {"symmetry_post", s.symmetry_post},
                          {"degenerate", s.degenerate}};
}

} // namespace symq
