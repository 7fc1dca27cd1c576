#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "symq/gmm.hpp"
#include "symq/matrix.hpp"
#include "symq/rng.hpp"
#include "symq/sac.hpp"

namespace symq {

struct CorrectionConfig {
    bool enabled = true;
    int k = 1;        // refresh the GMM every k gradient steps
    int clusters = 10;

    void validate() const; // ConfigError on k < 1 or clusters < 1
};

// Periodic record of how the correction reshapes the Bellman errors: the raw
// errors, the noise added to the targets, and their sum, plus skewness and
// symmetry statistics before/after. Statistics that cannot be computed (all
// post-errors identical, too few samples) are stored as NaN with the
// degenerate flag set.
struct ErrorSnapshot {
    long long step = 0;
    std::vector<double> pre_errors, noise, post_errors;
    double skew_pre = 0.0, skew_post = 0.0;
    double symmetry_pre = 0.0, symmetry_post = 0.0;
    bool degenerate = false;
};

// Owns the noise model inside the training loop: pools per-critic Bellman
// errors, refits the GMM on their negation every k gradient steps, and hands
// out zero-mean noise for critic updates. The model is created lazily at the
// first refresh so its initial centers come from real error data.
class SymCorrection {
  public:
    explicit SymCorrection(CorrectionConfig cfg);

    const CorrectionConfig& config() const { return cfg_; }
    bool enabled() const { return cfg_.enabled; }
    bool ready() const { return model_.has_value(); }
    long long refresh_count() const { return refresh_count_; }
    const GmmModel& model() const; // StateError before the first refresh

    // epsilon_i[n] = y[n] - Q_i(s_n, a_n) for every online critic, as a
    // B x N matrix (column i = critic i).
    static Matrix collect_errors(const CriticEnsemble& ensemble,
                                 const std::vector<Transition>& batch,
                                 std::span<const double> y);

    // Refit on the pooled errors when gradient_step is a multiple of k.
    // Returns whether a refresh happened. No-op while disabled.
    bool maybe_refresh(std::span<const double> pooled_errors,
                       long long gradient_step, Rng& rng);

    // batch_size draws from the fitted mixture; all zeros while disabled or
    // before the first refresh. critic_index only tags the call (draws for
    // successive critics consume one shared stream); it must be >= 0.
    std::vector<double> draw_noise(int batch_size, int critic_index, Rng& rng) const;

    static ErrorSnapshot snapshot(long long step, std::span<const double> pre_errors,
                                  std::span<const double> noise);

    void restore_model(GmmModel model); // checkpoint load

  private:
    CorrectionConfig cfg_;
    std::optional<GmmModel> model_;
    long long refresh_count_ = 0;
};

// One row per value: step,kind,value with kind in {pre, noise, post}. The
// exported noise is shifted so its sample mean equals the pre-error sample
// mean (display parity with the error histograms); the snapshot itself keeps
// the raw zero-mean noise.
void write_errors_csv_header(std::ostream& os);
void append_snapshot_csv(std::ostream& os, const ErrorSnapshot& s);

// {step, skew_pre, skew_post, symmetry_pre, symmetry_post, degenerate}.
nlohmann::json snapshot_summary(const ErrorSnapshot& s);

} // namespace symq
