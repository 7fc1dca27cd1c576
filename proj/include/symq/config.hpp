#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace symq {

// Everything a training run depends on. Numeric defaults are the desk-scale
// settings (pendulum in ~minutes on one core); preset() fills in the
// per-algorithm fields and paper_scale restores the full-size ensemble,
// network, and buffer.
struct AgentConfig {
    std::string env = "pendulum";
    std::string preset = "sac"; // sac | symsac | redq | symredq
    bool paper_scale = false;

    int n_critics = 1;   // N
    int m_in_target = 1; // M
    int utd = 1;         // G, critic updates per env step
    bool noise = false;  // the symmetric-correction toggle
    int k_refresh = 1;   // GMM refresh interval in gradient steps
    int clusters = 10;

    double gamma = 0.99;
    double rho = 0.005;
    double lr = 3e-4;
    int batch_size = 256;
    std::vector<int> hidden{64, 64}; // paper scale: {256, 256}
    long long buffer_capacity = 100000;

    long long total_env_steps = 30000;
    long long warmup_steps = 5000; // random-action starting data
    long long eval_interval = 1000;
    int eval_episodes = 10;
    long long snapshot_interval = 500; // gradient steps between error snapshots
    uint64_t seed = 0;

    // ConfigError naming the offending field.
    void validate() const;

    // Per-algorithm defaults; unknown name is a ConfigError.
    static AgentConfig make_preset(const std::string& name, bool paper_scale = false);

    // Parse a config file body: "preset"/"paper_scale" pick the baseline,
    // every other present key overrides it. Unknown keys are ConfigErrors.
    static AgentConfig from_json_text(const std::string& text);
};

void to_json(nlohmann::json& j, const AgentConfig& cfg);
void from_json(const nlohmann::json& j, AgentConfig& cfg);

} // namespace symq
