#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "symq/config.hpp"
#include "symq/correction.hpp"
#include "symq/env.hpp"
#include "symq/sac.hpp"

namespace symq {

struct EvalRow {
    long long env_step = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
};

struct RunLog {
    std::vector<EvalRow> evals;
    std::vector<ErrorSnapshot> snapshots;
    nlohmann::json config_echo;
    long long gradient_steps = 0;
    long long gmm_refreshes = 0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    RunLog log;
    AgentConfig config;
    PolicyNet policy;
    CriticEnsemble critics;
    EntropyTemp temp;
    std::optional<GmmModel> noise_model;
};

// Runs the full training loop: warmup with uniform random actions, then per
// env step G critic rounds (batch, subset, target, optional GMM refresh and
// noise, critic Adam step, Polyak) followed by one policy + temperature
// update on the last batch. Deterministic in (config, seed): env stepping,
// action sampling, batch sampling, subset draws, and noise draws each use
// their own derived rng stream, so disabling the correction does not perturb
// the rest.
TrainResult train(const AgentConfig& cfg);

// Deterministic-policy (tanh of the mean) rollouts; episode e always starts
// from the state drawn by the (seed, eval-stream, e) rng, so successive
// evaluations are comparable. Returns (mean, population std) of the
// undiscounted returns.
std::pair<double, double> evaluate(const PolicyNet& policy, Env& env, int episodes,
                                   uint64_t seed);

// One summary line per (config, checkpoint in {half, full}) aggregated over
// seeds; stderr is NaN when only one seed ran.
struct CompareRow {
    int config_index = 0;
    std::string label;
    std::string checkpoint; // "half" or "full"
    long long env_step = 0;
    double mean_return = 0.0;
    double stderr_return = 0.0;
    int n_seeds = 0;
};

// Trains every (config, seed) pair in order, handing each finished run to
// sink (if set) before starting the next, so partial results survive a
// failed run.
using RunSink = std::function<void(int config_index, const TrainResult&)>;
std::vector<CompareRow> compare(const std::vector<AgentConfig>& configs,
                                const std::vector<uint64_t>& seeds,
                                const RunSink& sink = nullptr);

// returns.csv body: env_step,mean_return,std_return.
void write_returns_csv(std::ostream& os, const RunLog& log);
// compare summary CSV; stderr empty when absent.
void write_compare_csv(std::ostream& os, std::span<const CompareRow> rows);

// summary.json body: final eval, step accounting, snapshot statistics.
nlohmann::json run_summary(const TrainResult& result);

// Everything needed to resume analysis: config echo, policy, critics,
// temperature, and the fitted noise model (null before the first refresh).
nlohmann::json checkpoint_json(const TrainResult& result);

struct Checkpoint {
    AgentConfig config;
    PolicyNet policy;
    CriticEnsemble critics;
    EntropyTemp temp;
    std::optional<GmmModel> noise_model;
};
Checkpoint load_checkpoint(const nlohmann::json& j);

} // namespace symq
