#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "symq/rng.hpp"

namespace symq {

struct EnvSpec {
    int state_dim = 0;
    int obs_dim = 0;
    int action_dim = 0;
    std::vector<double> action_low, action_high;
    int max_episode_steps = 0;
};

struct StepResult {
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false; // time-limit truncation; these envs never terminate early
};

// Episodic MDP with explicit state vectors. The instance itself only tracks
// the elapsed step count of the running episode; dynamics are pure in
// (state, action). Single-owner per rollout.
class Env {
  public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual std::string name() const = 0;

    // Draws an initial state and restarts the episode clock.
    virtual std::vector<double> reset(Rng& rng) = 0;

    // Advances the dynamics; actions outside [low, high] are clamped.
    virtual StepResult step(std::span<const double> state, std::span<const double> action) = 0;

    // Maps an internal state to the observation the agent sees.
    virtual std::vector<double> observe(std::span<const double> state) const = 0;
};

// "pendulum" or "reacher"; anything else is a ConfigError.
std::unique_ptr<Env> make_env(const std::string& name);

// Angle folded into (-pi, pi].
double wrap_angle(double theta);

} // namespace symq
