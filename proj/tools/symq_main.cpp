#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "symq/config.hpp"
#include "symq/correction.hpp"
#include "symq/error.hpp"
#include "symq/stats.hpp"
#include "symq/trainer.hpp"

namespace fs = std::filesystem;
using namespace symq;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read file " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spill(const fs::path& path, const std::string& body) {
    std::ofstream os(path);
    os << body;
    if (!os) throw DataError("cannot write " + path.string());
}

// Every config field as a CLI flag. Precedence: preset (or --config file,
// which embeds its own preset), then individual flags.
struct ConfigCli {
    std::string config_path, preset = "sac", env;
    bool paper_scale = false, noise = false;
    int n_critics = 0, m_in_target = 0, utd = 0, k_refresh = 0, clusters = 0;
    int batch_size = 0, eval_episodes = 0;
    double gamma = 0.0, rho = 0.0, lr = 0.0;
    std::vector<int> hidden;
    long long buffer_capacity = 0, total_env_steps = 0, warmup_steps = 0;
    long long eval_interval = 0, snapshot_interval = 0;
    uint64_t seed = 0;
    std::map<std::string, CLI::Option*> opts;

    void attach(CLI::App* c) {
        opts["config"] = c->add_option("--config", config_path, "JSON config file");
        opts["preset"] =
            c->add_option("--preset", preset, "sac | symsac | redq | symredq (default sac)");
        opts["paper_scale"] =
            c->add_flag("--paper-scale", paper_scale, "full-size ensemble/network/buffer");
        opts["env"] = c->add_option("--env", env, "pendulum | reacher");
        opts["n_critics"] = c->add_option("--n-critics", n_critics, "ensemble size N");
        opts["m_in_target"] = c->add_option("--m-in-target", m_in_target, "in-target subset M");
        opts["utd"] = c->add_option("--utd", utd, "critic updates per env step G");
        opts["noise"] =
            c->add_flag("--noise,!--no-noise", noise, "toggle the symmetric correction");
        opts["k_refresh"] = c->add_option("--k-refresh", k_refresh, "GMM refresh interval");
        opts["clusters"] = c->add_option("--clusters", clusters, "GMM cluster count");
        opts["gamma"] = c->add_option("--gamma", gamma, "discount");
        opts["rho"] = c->add_option("--rho", rho, "target smoothing coefficient");
        opts["lr"] = c->add_option("--lr", lr, "Adam learning rate");
        opts["batch_size"] = c->add_option("--batch-size", batch_size, "mini-batch size");
        opts["hidden"] =
            c->add_option("--hidden", hidden, "hidden layer widths (comma separated)")
                ->delimiter(',');
        opts["buffer_capacity"] =
            c->add_option("--buffer-capacity", buffer_capacity, "replay capacity");
        opts["total_env_steps"] =
            c->add_option("--total-env-steps", total_env_steps, "environment steps");
        opts["warmup_steps"] =
            c->add_option("--warmup-steps", warmup_steps, "random starting data");
        opts["eval_interval"] =
            c->add_option("--eval-interval", eval_interval, "env steps between evaluations");
        opts["eval_episodes"] =
            c->add_option("--eval-episodes", eval_episodes, "episodes per evaluation");
        opts["snapshot_interval"] = c->add_option("--snapshot-interval", snapshot_interval,
                                                  "gradient steps between error snapshots");
        opts["seed"] = c->add_option("--seed", seed, "run seed");
    }

    bool used(const std::string& key) const { return opts.at(key)->count() > 0; }

    AgentConfig build() const {
        AgentConfig cfg;
        if (used("config")) {
            if (used("preset") || used("paper_scale"))
                throw ConfigError("--preset/--paper-scale cannot be combined with --config");
            cfg = AgentConfig::from_json_text(slurp(config_path));
        } else {
            cfg = AgentConfig::make_preset(preset, paper_scale);
        }
        if (used("env")) cfg.env = env;
        if (used("n_critics")) cfg.n_critics = n_critics;
        if (used("m_in_target")) cfg.m_in_target = m_in_target;
        if (used("utd")) cfg.utd = utd;
        if (used("noise")) cfg.noise = noise;
        if (used("k_refresh")) cfg.k_refresh = k_refresh;
        if (used("clusters")) cfg.clusters = clusters;
        if (used("gamma")) cfg.gamma = gamma;
        if (used("rho")) cfg.rho = rho;
        if (used("lr")) cfg.lr = lr;
        if (used("batch_size")) cfg.batch_size = batch_size;
        if (used("hidden")) cfg.hidden = hidden;
        if (used("buffer_capacity")) cfg.buffer_capacity = buffer_capacity;
        if (used("total_env_steps")) cfg.total_env_steps = total_env_steps;
        if (used("warmup_steps")) cfg.warmup_steps = warmup_steps;
        if (used("eval_interval")) cfg.eval_interval = eval_interval;
        if (used("eval_episodes")) cfg.eval_episodes = eval_episodes;
        if (used("snapshot_interval")) cfg.snapshot_interval = snapshot_interval;
        if (used("seed")) cfg.seed = seed;
        cfg.validate();
        return cfg;
    }
};

void write_run_outputs(const fs::path& dir, const TrainResult& run) {
    fs::create_directories(dir);
    {
        std::ostringstream os;
        write_returns_csv(os, run.log);
        spill(dir / "returns.csv", os.str());
    }
    {
        std::ostringstream os;
        write_errors_csv_header(os);
        for (const auto& snap : run.log.snapshots) append_snapshot_csv(os, snap);
        spill(dir / "errors.csv", os.str());
    }
    spill(dir / "summary.json", run_summary(run).dump(2) + "\n");
    spill(dir / "config.echo.json", run.log.config_echo.dump(2) + "\n");
    spill(dir / "checkpoint.json", checkpoint_json(run).dump() + "\n");
}

// "3", "0..4", or "1,5,9" -> flat list.
std::vector<uint64_t> parse_seeds(const std::vector<std::string>& tokens) {
    std::vector<uint64_t> seeds;
    for (const auto& token : tokens) {
        std::stringstream ss(token);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (part.empty()) continue;
            const auto dots = part.find("..");
            try {
                if (dots == std::string::npos) {
                    seeds.push_back(std::stoull(part));
                } else {
                    const uint64_t lo = std::stoull(part.substr(0, dots));
                    const uint64_t hi = std::stoull(part.substr(dots + 2));
                    if (hi < lo) throw ConfigError("seed range '" + part + "' is reversed");
                    for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
                }
            } catch (const std::logic_error&) {
                throw ConfigError("cannot parse seed token '" + part + "'");
            }
        }
    }
    if (seeds.empty()) throw ConfigError("no seeds given");
    return seeds;
}

Checkpoint load_checkpoint_file(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(slurp(path), nullptr, false);
    if (j.is_discarded()) throw DataError("checkpoint is not valid JSON: " + path);
    return load_checkpoint(j);
}

int run_train(const ConfigCli& flags, const std::string& out_dir) {
    const AgentConfig cfg = flags.build();
    const TrainResult run = train(cfg);
    write_run_outputs(out_dir, run);
    const EvalRow& last = run.log.evals.back();
    std::cout << cfg.preset << " on " << cfg.env << " seed " << cfg.seed << ": final return "
              << last.mean_return << " +- " << last.std_return << " after " << last.env_step
              << " env steps (" << run.log.wall_seconds << "s)\n"
              << "outputs in " << out_dir << "\n";
    return 0;
}

int run_eval(const std::string& ckpt_path, int episodes, uint64_t seed, bool seed_given,
             const std::string& env_override) {
    const Checkpoint ck = load_checkpoint_file(ckpt_path);
    auto env = make_env(env_override.empty() ? ck.config.env : env_override);
    const uint64_t eval_seed = seed_given ? seed : ck.config.seed;
    const int n = episodes > 0 ? episodes : ck.config.eval_episodes;
    const auto [mean, sd] = evaluate(ck.policy, *env, n, eval_seed);
    std::cout << nlohmann::json{{"env", env->name()},
                                {"episodes", n},
                                {"seed", eval_seed},
                                {"mean_return", mean},
                                {"std_return", sd}}
                     .dump(2)
              << "\n";
    return 0;
}

int run_compare(const std::vector<std::string>& config_paths,
                const std::vector<std::string>& seed_tokens, const std::string& out_dir) {
    const auto seeds = parse_seeds(seed_tokens);
    std::vector<AgentConfig> configs;
    std::vector<std::string> stems;
    for (const auto& path : config_paths) {
        AgentConfig cfg = AgentConfig::from_json_text(slurp(path));
        cfg.validate();
        configs.push_back(std::move(cfg));
        stems.push_back(fs::path(path).stem().string());
    }
    const fs::path out(out_dir);
    const auto rows = compare(configs, seeds, [&](int ci, const TrainResult& run) {
        const fs::path dir = out / (stems[static_cast<size_t>(ci)] + "-seed" +
                                    std::to_string(run.config.seed));
        write_run_outputs(dir, run);
        std::cout << "finished " << stems[static_cast<size_t>(ci)] << " seed "
                  << run.config.seed << ": final return "
                  << run.log.evals.back().mean_return << "\n";
    });
    fs::create_directories(out);
    std::ostringstream os;
    write_compare_csv(os, rows);
    spill(out / "compare.csv", os.str());
    std::cout << os.str() << "summary in " << (out / "compare.csv").string() << "\n";
    return 0;
}

int run_diagnose(const std::string& ckpt_path, const std::string& out_dir, int samples,
                 uint64_t seed) {
    const Checkpoint ck = load_checkpoint_file(ckpt_path);
    const fs::path out =
        out_dir.empty() ? fs::path(ckpt_path).parent_path() : fs::path(out_dir);
    fs::create_directories(out.empty() ? fs::path(".") : out);

    nlohmann::json report{{"checkpoint", ckpt_path},
                          {"env", ck.config.env},
                          {"preset", ck.config.preset},
                          {"alpha", ck.temp.alpha()},
                          {"n_critics", static_cast<int>(ck.critics.online.size())},
                          {"has_noise_model", ck.noise_model.has_value()}};
    if (ck.noise_model) {
        const GmmModel& model = *ck.noise_model;
        Rng rng = Rng::derive(seed, stream::kNoise);
        const auto draws = model.sample(rng, samples);
        MomentAccumulator acc;
        std::ostringstream hist;
        hist << std::setprecision(17) << "value\n";
        for (double v : draws) {
            acc.push(v);
            hist << v << '\n';
        }
        spill(out / "noise_hist.csv", hist.str());

        nlohmann::json gmm;
        to_json(gmm, model);
        report["gmm"] = std::move(gmm);
        report["mixture_weights"] = model.mixture_weights();
        report["noise_sample"] = {{"n", samples},
                                  {"mean", acc.mean()},
                                  {"std", std::sqrt(acc.variance())},
                                  {"skewness", acc.skewness()},
                                  {"symmetry", symmetry_statistic(draws)}};
    }
    spill(out / "diagnose.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symmetric Q-learning benchmark harness"};
    app.require_subcommand(1);

    auto* train_cmd = app.add_subcommand("train", "run one training job");
    ConfigCli train_flags;
    train_flags.attach(train_cmd);
    std::string train_out;
    train_cmd->add_option("--out", train_out, "output directory")->required();

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint's policy");
    std::string eval_ckpt, eval_env;
    int eval_episodes = 0;
    uint64_t eval_seed = 0;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint.json path")->required();
    eval_cmd->add_option("--episodes", eval_episodes, "episode count (default from config)");
    auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "evaluation seed");
    eval_cmd->add_option("--env", eval_env, "override the environment");

    auto* compare_cmd = app.add_subcommand("compare", "train several configs across seeds");
    std::vector<std::string> compare_configs, compare_seeds;
    std::string compare_out;
    compare_cmd->add_option("--configs", compare_configs, "config files")->required();
    compare_cmd->add_option("--seeds", compare_seeds, "seeds, e.g. 0..4 or 1,5,9")->required();
    compare_cmd->add_option("--out", compare_out, "output directory")->required();

    auto* diagnose_cmd =
        app.add_subcommand("diagnose", "re-export noise statistics from a checkpoint");
    std::string diag_ckpt, diag_out;
    int diag_samples = 100000;
    uint64_t diag_seed = 0;
    diagnose_cmd->add_option("--checkpoint", diag_ckpt, "checkpoint.json path")->required();
    diagnose_cmd->add_option("--out", diag_out, "output directory (default: checkpoint's)");
    diagnose_cmd->add_option("--samples", diag_samples, "noise draws for the histogram");
    diagnose_cmd->add_option("--seed", diag_seed, "sampling seed");

    try {
        app.parse(argc, argv);
        if (train_cmd->parsed()) return run_train(train_flags, train_out);
        if (eval_cmd->parsed())
            return run_eval(eval_ckpt, eval_episodes, eval_seed, eval_seed_opt->count() > 0,
                            eval_env);
        if (compare_cmd->parsed())
            return run_compare(compare_configs, compare_seeds, compare_out);
        if (diagnose_cmd->parsed())
            return run_diagnose(diag_ckpt, diag_out, diag_samples, diag_seed);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
