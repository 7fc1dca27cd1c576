#include "symq/config.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "symq/error.hpp"

namespace symq {

void AgentConfig::validate() const {
    const auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("config field '" + field + "': " + why);
    };
    if (n_critics < 1) fail("n_critics", "must be >= 1");
    if (m_in_target < 1 || m_in_target > n_critics)
        fail("m_in_target", "must satisfy 1 <= M <= N");
    if (utd < 1) fail("utd", "must be >= 1");
    if (k_refresh < 1) fail("k_refresh", "must be >= 1");
    if (clusters < 1) fail("clusters", "must be >= 1");
    if (!(gamma > 0.0) || gamma > 1.0) fail("gamma", "must be in (0, 1]");
    if (!(rho > 0.0) || rho > 1.0) fail("rho", "must be in (0, 1]");
    if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr", "must be positive and finite");
    if (batch_size < 1) fail("batch_size", "must be >= 1");
    if (hidden.empty()) fail("hidden", "must name at least one layer");
    for (int h : hidden)
        if (h < 1) fail("hidden", "layer widths must be >= 1");
    if (buffer_capacity < 1) fail("buffer_capacity", "must be >= 1");
    if (total_env_steps < 0) fail("total_env_steps", "must be >= 0");
    if (warmup_steps < 0) fail("warmup_steps", "must be >= 0");
    if (eval_interval < 1) fail("eval_interval", "must be >= 1");
    if (eval_episodes < 1) fail("eval_episodes", "must be >= 1");
    if (snapshot_interval < 1) fail("snapshot_interval", "must be >= 1");
}

AgentConfig AgentConfig::make_preset(const std::string& name, bool paper_scale) {
    AgentConfig cfg;
    cfg.preset = name;
    cfg.paper_scale = paper_scale;
    if (name == "sac") {
        cfg.n_critics = 1, cfg.m_in_target = 1, cfg.utd = 1;
        cfg.noise = false;
    } else if (name == "symsac") {
        cfg.n_critics = 1, cfg.m_in_target = 1, cfg.utd = 1;
        cfg.noise = true;
    } else if (name == "redq") {
        cfg.noise = false;
        if (paper_scale) cfg.n_critics = 10, cfg.m_in_target = 2, cfg.utd = 20;
        else cfg.n_critics = 5, cfg.m_in_target = 2, cfg.utd = 5;
    } else if (name == "symredq") {
        cfg.noise = true;
        if (paper_scale) cfg.n_critics = 20, cfg.m_in_target = 2, cfg.utd = 20;
        else cfg.n_critics = 5, cfg.m_in_target = 2, cfg.utd = 5;
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    if (paper_scale) {
        cfg.buffer_capacity = 1000000;
        cfg.hidden = {256, 256};
    }
    return cfg;
}

void to_json(nlohmann::json& j, const AgentConfig& cfg) {
    j = nlohmann::json{{"env", cfg.env},
                       {"preset", cfg.preset},
                       {"paper_scale", cfg.paper_scale},
                       {"n_critics", cfg.n_critics},
                       {"m_in_target", cfg.m_in_target},
                       {"utd", cfg.utd},
                       {"noise", cfg.noise},
                       {"k_refresh", cfg.k_refresh},
                       {"clusters", cfg.clusters},
                       {"gamma", cfg.gamma},
                       {"rho", cfg.rho},
                       {"lr", cfg.lr},
                       {"batch_size", cfg.batch_size},
                       {"hidden", cfg.hidden},
                       {"buffer_capacity", cfg.buffer_capacity},
                       {"total_env_steps", cfg.total_env_steps},
                       {"warmup_steps", cfg.warmup_steps},
                       {"eval_interval", cfg.eval_interval},
                       {"eval_episodes", cfg.eval_episodes},
                       {"snapshot_interval", cfg.snapshot_interval},
                       {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, AgentConfig& cfg) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known{
        "env",           "preset",          "paper_scale",   "n_critics",
        "m_in_target",   "utd",             "noise",         "k_refresh",
        "clusters",      "gamma",           "rho",           "lr",
        "batch_size",    "hidden",          "buffer_capacity", "total_env_steps",
        "warmup_steps",  "eval_interval",   "eval_episodes", "snapshot_interval",
        "seed"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");

    try {
        cfg = AgentConfig::make_preset(j.value("preset", std::string("sac")),
                                       j.value("paper_scale", false));
        if (j.contains("env")) j.at("env").get_to(cfg.env);
        if (j.contains("n_critics")) j.at("n_critics").get_to(cfg.n_critics);
        if (j.contains("m_in_target")) j.at("m_in_target").get_to(cfg.m_in_target);
        if (j.contains("utd")) j.at("utd").get_to(cfg.utd);
        if (j.contains("noise")) j.at("noise").get_to(cfg.noise);
        if (j.contains("k_refresh")) j.at("k_refresh").get_to(cfg.k_refresh);
        if (j.contains("clusters")) j.at("clusters").get_to(cfg.clusters);
        if (j.contains("gamma")) j.at("gamma").get_to(cfg.gamma);
        if (j.contains("rho")) j.at("rho").get_to(cfg.rho);
        if (j.contains("lr")) j.at("lr").get_to(cfg.lr);
        if (j.contains("batch_size")) j.at("batch_size").get_to(cfg.batch_size);
        if (j.contains("hidden")) j.at("hidden").get_to(cfg.hidden);
        if (j.contains("buffer_capacity")) j.at("buffer_capacity").get_to(cfg.buffer_capacity);
        if (j.contains("total_env_steps")) j.at("total_env_steps").get_to(cfg.total_env_steps);
        if (j.contains("warmup_steps")) j.at("warmup_steps").get_to(cfg.warmup_steps);
        if (j.contains("eval_interval")) j.at("eval_interval").get_to(cfg.eval_interval);
        if (j.contains("eval_episodes")) j.at("eval_episodes").get_to(cfg.eval_episodes);
        if (j.contains("snapshot_interval"))
            j.at("snapshot_interval").get_to(cfg.snapshot_interval);
        if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
}

AgentConfig AgentConfig::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    return j.get<AgentConfig>();
}

} // namespace symq
