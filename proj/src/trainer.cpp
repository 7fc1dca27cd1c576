#include "symq/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>

#include "symq/error.hpp"
#include "symq/replay.hpp"
#include "symq/stats.hpp"

namespace symq {

std::pair<double, double> evaluate(const PolicyNet& policy, Env& env, int episodes,
                                   uint64_t seed) {
    if (episodes < 1) throw ConfigError("evaluate: episodes must be >= 1");
    MomentAccumulator acc;
    // One stream consumed across the episodes, re-derived per call: every
    // evaluation round replays the same start states, so the learning curve
    // is comparable across rounds.
    Rng eval_rng = Rng::derive(seed, stream::kEval);
    for (int e = 0; e < episodes; ++e) {
        std::vector<double> state = env.reset(eval_rng);
        double ret = 0.0;
        while (true) {
            const auto action = policy_mean_action(policy, env.observe(state));
            StepResult sr = env.step(state, action);
            ret += sr.reward;
            state = std::move(sr.next_state);
            if (sr.done) break;
        }
        acc.push(ret);
    }
    return {acc.mean(), std::sqrt(acc.variance())};
}

TrainResult train(const AgentConfig& cfg) {
    cfg.validate();
    if (cfg.buffer_capacity > std::numeric_limits<int>::max())
        throw ConfigError("config field 'buffer_capacity': too large for this build");
    auto env = make_env(cfg.env);
    auto eval_env = make_env(cfg.env); // evaluation must not disturb the episode clock
    const EnvSpec& es = env->spec();

    Rng env_rng = Rng::derive(cfg.seed, stream::kEnv);
    Rng policy_rng = Rng::derive(cfg.seed, stream::kPolicy);
    Rng batch_rng = Rng::derive(cfg.seed, stream::kBatch);
    Rng subset_rng = Rng::derive(cfg.seed, stream::kSubset);
    Rng noise_rng = Rng::derive(cfg.seed, stream::kNoise);
    Rng init_rng = Rng::derive(cfg.seed, stream::kInit);

    TrainResult res;
    res.config = cfg;
    res.policy = PolicyNet::init(es.obs_dim, es.action_dim, cfg.hidden, es.action_low,
                                 es.action_high, init_rng);
    res.critics = CriticEnsemble::init(cfg.n_critics, es.obs_dim, es.action_dim, cfg.hidden,
                                       init_rng);
    res.temp = EntropyTemp{0.0, -static_cast<double>(es.action_dim)};

    std::vector<AdamState> critic_opt;
    critic_opt.reserve(res.critics.online.size());
    for (const auto& critic : res.critics.online) critic_opt.push_back(AdamState::make(critic, cfg.lr));
    AdamState policy_opt = AdamState::make(res.policy.net, cfg.lr);
    ScalarAdamState temp_opt;
    temp_opt.lr = cfg.lr;

    ReplayBuffer buffer(static_cast<int>(cfg.buffer_capacity), es.obs_dim, es.action_dim);
    SymCorrection corr(CorrectionConfig{cfg.noise, cfg.k_refresh, cfg.clusters});

    RunLog& log = res.log;
    log.config_echo = cfg;

    const auto t0 = std::chrono::steady_clock::now();
    const auto do_eval = [&](long long step) {
        const auto [mean, sd] = evaluate(res.policy, *eval_env, cfg.eval_episodes, cfg.seed);
        log.evals.push_back({step, mean, sd});
    };
    do_eval(0);

    std::vector<double> state = env->reset(env_rng);
    std::vector<Transition> batch;
    for (long long step = 1; step <= cfg.total_env_steps; ++step) {
        Transition tr;
        tr.state = env->observe(state);
        if (step <= cfg.warmup_steps) {
            tr.action.resize(static_cast<size_t>(es.action_dim));
            for (int j = 0; j < es.action_dim; ++j)
                tr.action[static_cast<size_t>(j)] = policy_rng.uniform(
                    es.action_low[static_cast<size_t>(j)], es.action_high[static_cast<size_t>(j)]);
        } else {
            tr.action = policy_sample(res.policy, tr.state, policy_rng).first;
        }
        StepResult sr = env->step(state, tr.action);
        tr.reward = sr.reward;
        tr.next_state = env->observe(sr.next_state);
        tr.done = false; // episodes only end by time limit; keep bootstrapping
        buffer.push(tr);
        state = sr.done ? env->reset(env_rng) : std::move(sr.next_state);

        if (step > cfg.warmup_steps) {
            for (int g = 0; g < cfg.utd; ++g) {
                ++log.gradient_steps;
                batch = buffer.sample_batch(cfg.batch_size, batch_rng);
                const auto subset = subset_rng.sample_indices(cfg.n_critics, cfg.m_in_target);
                const auto y = compute_target(res.critics, res.policy, res.temp, batch, subset,
                                              cfg.gamma, policy_rng);

                const bool refresh_due =
                    corr.enabled() && log.gradient_steps % cfg.k_refresh == 0;
                const bool snapshot_due =
                    corr.enabled() && log.gradient_steps % cfg.snapshot_interval == 0;
                Matrix errs;
                if (refresh_due || snapshot_due)
                    errs = SymCorrection::collect_errors(res.critics, batch, y);
                if (refresh_due) corr.maybe_refresh(errs.v, log.gradient_steps, noise_rng);

                Matrix eta(cfg.batch_size, cfg.n_critics);
                if (corr.enabled() && corr.ready()) {
                    for (int i = 0; i < cfg.n_critics; ++i) {
                        const auto col = corr.draw_noise(cfg.batch_size, i, noise_rng);
                        for (int b = 0; b < cfg.batch_size; ++b)
                            eta.at(b, i) = col[static_cast<size_t>(b)];
                    }
                }
                critic_update(res.critics, batch, y, eta, critic_opt);
                // cfg.rho is the soft-update convention: the fraction of the
                // online net blended into the target per step. polyak_update's
                // first coefficient weights the *target*, hence 1 - rho.
                res.critics.polyak(1.0 - cfg.rho);
                if (snapshot_due && corr.ready())
                    log.snapshots.push_back(
                        SymCorrection::snapshot(log.gradient_steps, errs.v, eta.v));
            }
            std::vector<double> log_probs;
            policy_update(res.policy, res.critics, res.temp, batch, policy_opt, policy_rng,
                          &log_probs);
            temperature_update(res.temp, log_probs, temp_opt);
        }

        if (step % cfg.eval_interval == 0 || step == cfg.total_env_steps) do_eval(step);
    }

    log.gmm_refreshes = corr.refresh_count();
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (corr.ready()) res.noise_model = corr.model();
    return res;
}

std::vector<CompareRow> compare(const std::vector<AgentConfig>& configs,
                                const std::vector<uint64_t>& seeds, const RunSink& sink) {
    if (configs.empty()) throw ConfigError("compare: need at least one config");
    if (seeds.empty()) throw ConfigError("compare: need at least one seed");

    std::vector<CompareRow> rows;
    for (size_t ci = 0; ci < configs.size(); ++ci) {
        std::vector<RunLog> logs;
        for (uint64_t seed : seeds) {
            AgentConfig cfg = configs[ci];
            cfg.seed = seed;
            TrainResult run = train(cfg);
            if (sink) sink(static_cast<int>(ci), run);
            logs.push_back(std::move(run.log));
        }
        const auto& grid = logs.front().evals;
        const long long half_target = configs[ci].total_env_steps / 2;
        size_t half_idx = 0;
        for (size_t i = 1; i < grid.size(); ++i)
            if (std::llabs(grid[i].env_step - half_target) <
                std::llabs(grid[half_idx].env_step - half_target))
                half_idx = i;

        const auto emit = [&](size_t idx, const char* tag) {
            MomentAccumulator acc;
            for (const auto& lg : logs) acc.push(lg.evals[idx].mean_return);
            CompareRow row;
            row.config_index = static_cast<int>(ci);
            row.label = configs[ci].preset;
            row.checkpoint = tag;
            row.env_step = grid[idx].env_step;
            row.mean_return = acc.mean();
            const auto n = static_cast<double>(seeds.size());
            row.stderr_return = seeds.size() > 1
                                    ? std::sqrt(acc.variance() / (n - 1.0))
                                    : std::numeric_limits<double>::quiet_NaN();
            row.n_seeds = static_cast<int>(seeds.size());
            rows.push_back(std::move(row));
        };
        emit(half_idx, "half");
        emit(grid.size() - 1, "full");
    }
    return rows;
}

void write_returns_csv(std::ostream& os, const RunLog& log) {
    os << std::setprecision(17);
    os << "env_step,mean_return,std_return\n";
    for (const auto& row : log.evals)
        os << row.env_step << ',' << row.mean_return << ',' << row.std_return << '\n';
}

void write_compare_csv(std::ostream& os, std::span<const CompareRow> rows) {
    os << std::setprecision(17);
    os << "config_index,label,checkpoint,env_step,mean_return,stderr_return,n_seeds\n";
    for (const auto& r : rows) {
        os << r.config_index << ',' << r.label << ',' << r.checkpoint << ',' << r.env_step
           << ',' << r.mean_return << ',';
        if (std::isfinite(r.stderr_return)) os << r.stderr_return;
        os << ',' << r.n_seeds << '\n';
    }
}

nlohmann::json run_summary(const TrainResult& result) {
    const RunLog& log = result.log;
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& s : log.snapshots) snaps.push_back(snapshot_summary(s));
    const EvalRow& final_row = log.evals.back();
    return nlohmann::json{{"env", result.config.env},
                          {"preset", result.config.preset},
                          {"seed", result.config.seed},
                          {"final_env_step", final_row.env_step},
                          {"final_mean_return", final_row.mean_return},
                          {"final_std_return", final_row.std_return},
                          {"gradient_steps", log.gradient_steps},
                          {"gmm_refreshes", log.gmm_refreshes},
                          {"wall_seconds", log.wall_seconds},
                          {"snapshots", std::move(snaps)}};
}

namespace {

nlohmann::json policy_to_json(const PolicyNet& p) {
    nlohmann::json net;
    to_json(net, p.net);
    return nlohmann::json{{"net", std::move(net)},
                          {"action_dim", p.action_dim},
                          {"action_scale", p.action_scale},
                          {"action_offset", p.action_offset}};
}

PolicyNet policy_from_json(const nlohmann::json& j) {
    PolicyNet p;
    from_json(j.at("net"), p.net);
    j.at("action_dim").get_to(p.action_dim);
    j.at("action_scale").get_to(p.action_scale);
    j.at("action_offset").get_to(p.action_offset);
    if (p.action_dim < 1 || p.action_scale.size() != static_cast<size_t>(p.action_dim) ||
        p.action_offset.size() != static_cast<size_t>(p.action_dim) ||
        p.net.layer_sizes.back() != 2 * p.action_dim)
        throw DataError("checkpoint policy head is inconsistent");
    return p;
}

} // namespace

nlohmann::json checkpoint_json(const TrainResult& result) {
    nlohmann::json online = nlohmann::json::array(), target = nlohmann::json::array();
    for (const auto& c : result.critics.online) {
        nlohmann::json j;
        to_json(j, c);
        online.push_back(std::move(j));
    }
    for (const auto& c : result.critics.target) {
        nlohmann::json j;
        to_json(j, c);
        target.push_back(std::move(j));
    }
    nlohmann::json noise;
    if (result.noise_model) to_json(noise, *result.noise_model);

    return nlohmann::json{{"format", "symq.checkpoint.v1"},
                          {"config", result.config},
                          {"policy", policy_to_json(result.policy)},
                          {"critics", {{"online", std::move(online)}, {"target", std::move(target)}}},
                          {"log_alpha", result.temp.log_alpha},
                          {"target_entropy", result.temp.target_entropy},
                          {"noise_model", std::move(noise)}};
}

Checkpoint load_checkpoint(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "symq.checkpoint.v1")
        throw DataError("not a symq.checkpoint.v1 document");
    Checkpoint ck;
    try {
        ck.config = j.at("config").get<AgentConfig>();
        ck.policy = policy_from_json(j.at("policy"));
        for (const auto& cj : j.at("critics").at("online"))
            ck.critics.online.push_back(cj.get<MlpNet>());
        for (const auto& cj : j.at("critics").at("target"))
            ck.critics.target.push_back(cj.get<MlpNet>());
        j.at("log_alpha").get_to(ck.temp.log_alpha);
        j.at("target_entropy").get_to(ck.temp.target_entropy);
        if (j.contains("noise_model") && !j.at("noise_model").is_null())
            ck.noise_model = j.at("noise_model").get<GmmModel>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
    if (ck.critics.online.size() != ck.critics.target.size() || ck.critics.online.empty())
        throw DataError("checkpoint critic ensemble is inconsistent");
    return ck;
}

} // namespace symq
