#include "symq/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "symq/error.hpp"

namespace symq {

double wrap_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(theta + std::numbers::pi, two_pi);
    if (w <= 0.0) w += two_pi;
    return w - std::numbers::pi;
}

namespace {

void check_finite(std::span<const double> xs, const char* what) {
    for (double x : xs)
        if (!std::isfinite(x)) throw DataError(std::string("env step: non-finite ") + what);
}

double clamp_action(double a, double lo, double hi) { return std::clamp(a, lo, hi); }

// Classic torque-limited pendulum swing-up. State [theta, thetadot];
// theta = 0 is upright. Semi-implicit Euler with the new velocity clamped.
class PendulumEnv final : public Env {
  public:
    PendulumEnv() {
        spec_.state_dim = 2;
        spec_.obs_dim = 3;
        spec_.action_dim = 1;
        spec_.action_low = {-kMaxTorque};
        spec_.action_high = {kMaxTorque};
        spec_.max_episode_steps = 200;
    }

    const EnvSpec& spec() const override { return spec_; }
    std::string name() const override { return "pendulum"; }

    std::vector<double> reset(Rng& rng) override {
        elapsed_ = 0;
        return {rng.uniform(-std::numbers::pi, std::numbers::pi), rng.uniform(-1.0, 1.0)};
    }

    StepResult step(std::span<const double> state, std::span<const double> action) override {
        check_finite(state, "state");
        check_finite(action, "action");
        const double theta = state[0];
        const double thetadot = state[1];
        const double u = clamp_action(action[0], -kMaxTorque, kMaxTorque);

        const double wrapped = wrap_angle(theta);
        const double reward =
            -(wrapped * wrapped + 0.1 * thetadot * thetadot + 0.001 * u * u);

        const double accel = (3.0 * kG / (2.0 * kL)) * std::sin(theta) +
                             (3.0 / (kM * kL * kL)) * u;
        const double new_thetadot =
            std::clamp(thetadot + accel * kDt, -kMaxSpeed, kMaxSpeed);
        const double new_theta = theta + new_thetadot * kDt;

        ++elapsed_;
        return {{new_theta, new_thetadot}, reward, elapsed_ >= spec_.max_episode_steps};
    }

    std::vector<double> observe(std::span<const double> state) const override {
        return {std::cos(state[0]), std::sin(state[0]), state[1]};
    }

  private:
    static constexpr double kG = 10.0, kM = 1.0, kL = 1.0, kDt = 0.05;
    static constexpr double kMaxTorque = 2.0, kMaxSpeed = 8.0;
    EnvSpec spec_;
    int elapsed_ = 0;
};

// Planar point mass pushed toward a per-episode goal. State
// [px, py, vx, vy, gx, gy]; drag -kDrag*v bounds speed at |u|/kDrag.
class ReacherEnv final : public Env {
  public:
    ReacherEnv() {
        spec_.state_dim = 6;
        spec_.obs_dim = 6;
        spec_.action_dim = 2;
        spec_.action_low = {-1.0, -1.0};
        spec_.action_high = {1.0, 1.0};
        spec_.max_episode_steps = 100;
    }

    const EnvSpec& spec() const override { return spec_; }
    std::string name() const override { return "reacher"; }

    std::vector<double> reset(Rng& rng) override {
        elapsed_ = 0;
        return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0, 0.0,
                rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }

    StepResult step(std::span<const double> state, std::span<const double> action) override {
        check_finite(state, "state");
        check_finite(action, "action");
        const double ux = clamp_action(action[0], -1.0, 1.0);
        const double uy = clamp_action(action[1], -1.0, 1.0);

        const double dx = state[0] - state[4];
        const double dy = state[1] - state[5];
        const double reward = -std::sqrt(dx * dx + dy * dy);

        const double vx = state[2] + kDt * (ux - kDrag * state[2]);
        const double vy = state[3] + kDt * (uy - kDrag * state[3]);
        const double px = state[0] + kDt * vx;
        const double py = state[1] + kDt * vy;

        ++elapsed_;
        return {{px, py, vx, vy, state[4], state[5]}, reward,
                elapsed_ >= spec_.max_episode_steps};
    }

    std::vector<double> observe(std::span<const double> state) const override {
        return {state[0], state[1], state[2], state[3],
                state[4] - state[0], state[5] - state[1]};
    }

  private:
    static constexpr double kDt = 0.1, kDrag = 0.5;
    EnvSpec spec_;
    int elapsed_ = 0;
};

} // namespace

std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "pendulum") return std::make_unique<PendulumEnv>();
    if (name == "reacher") return std::make_unique<ReacherEnv>();
    throw ConfigError("unknown env name: " + name);
}

} // namespace symq
