#include "serla/env.hpp"

#include <algorithm>
#include <cmath>

namespace serla {

namespace {
constexpr double kTargetRadius = 0.3;  // chained_targets regions
constexpr double kWallY = 2.5;
constexpr double kWallGapX = 4.0;  // wall covers x in [0, kWallGapX]
}  // namespace

std::string to_string(EnvName name) {
    return name == EnvName::kPointMaze ? "point_maze" : "chained_targets";
}

EnvName env_name_from_string(const std::string& s) {
    if (s == "point_maze") return EnvName::kPointMaze;
    if (s == "chained_targets") return EnvName::kChainedTargets;
    throw ConfigurationError("unknown environment name: " + s);
}

EnvSpec EnvSpec::make(EnvName name) {
    if (name == EnvName::kPointMaze) {
        return {name, /*state_dim=*/4, /*action_dim=*/2, /*max_episode_steps=*/300,
                /*max_return=*/1.0};
    }
    return {name, /*state_dim=*/4 + kNumSubtasks + 1, /*action_dim=*/2,
            /*max_episode_steps=*/400, /*max_return=*/4.0};
}

Eigen::Vector2d Env::nominal_start(EnvName name) {
    return name == EnvName::kPointMaze ? Eigen::Vector2d(0.5, 0.5)
                                       : Eigen::Vector2d(2.5, 2.5);
}

Eigen::Vector2d Env::maze_goal() { return {2.5, 4.5}; }
double Env::maze_wall_y() { return kWallY; }
double Env::maze_wall_gap_x() { return kWallGapX; }

std::array<Eigen::Vector2d, kNumSubtasks> Env::chained_targets() {
    return {Eigen::Vector2d(4.5, 0.5), Eigen::Vector2d(4.5, 4.5),
            Eigen::Vector2d(0.5, 4.5), Eigen::Vector2d(0.5, 0.5)};
}

Env::Env(const EnvSpec& spec) : spec_(spec) {}

State Env::reset(Rng& rng) {
    // Uniform over a disk of radius kResetNoiseRadius around the nominal start.
    const Eigen::Vector2d start = nominal_start(spec_.name);
    double r = kResetNoiseRadius * std::sqrt(rng.uniform());
    double a = rng.uniform(0.0, 6.283185307179586);
    pos_ = start + r * Eigen::Vector2d(std::cos(a), std::sin(a));
    vel_.setZero();
    subtasks_done_ = 0;
    steps_ = 0;
    done_ = false;
    return observation();
}

State Env::observation() const {
    State obs(spec_.state_dim);
    obs[0] = pos_[0];
    obs[1] = pos_[1];
    obs[2] = vel_[0];
    obs[3] = vel_[1];
    if (spec_.name == EnvName::kChainedTargets) {
        for (int i = 0; i <= kNumSubtasks; ++i) obs[4 + i] = (subtasks_done_ == i) ? 1.0 : 0.0;
    }
    return obs;
}

void Env::set_state_from_observation(const State& obs) {
    require(obs.size() == spec_.state_dim, "set_state_from_observation: dim mismatch");
    pos_ = {obs[0], obs[1]};
    vel_ = {obs[2], obs[3]};
    subtasks_done_ = 0;
    if (spec_.name == EnvName::kChainedTargets) {
        for (int i = 0; i <= kNumSubtasks; ++i)
            if (obs[4 + i] > 0.5) subtasks_done_ = i;
    }
    steps_ = 0;
    done_ = false;
}

StepResult Env::step(const Action& a) {
    require(!done_, "Env::step called after episode end");
    require(a.size() == spec_.action_dim, "Env::step: action dimension mismatch");

    Eigen::Vector2d acc(std::clamp(a[0], -1.0, 1.0), std::clamp(a[1], -1.0, 1.0));
    vel_ += kDt * acc;
    if (double speed = vel_.norm(); speed > kMaxSpeed) vel_ *= kMaxSpeed / speed;

    Eigen::Vector2d next = pos_ + kDt * vel_;

    // Wall blocking (point_maze): horizontal wall at y = kWallY, x <= kWallGapX.
    if (spec_.name == EnvName::kPointMaze) {
        const bool crosses = (pos_[1] - kWallY) * (next[1] - kWallY) < 0.0;
        if (crosses) {
            double t = (kWallY - pos_[1]) / (next[1] - pos_[1]);
            double x_at = pos_[0] + t * (next[0] - pos_[0]);
            if (x_at <= kWallGapX) {
                next[1] = pos_[1];
                vel_[1] = 0.0;
            }
        }
    }

    // Arena bounds.
    for (int i = 0; i < 2; ++i) {
        if (next[i] < 0.0) { next[i] = 0.0; vel_[i] = 0.0; }
        if (next[i] > kArenaSize) { next[i] = kArenaSize; vel_[i] = 0.0; }
    }
    pos_ = next;
    ++steps_;

    double reward = 0.0;
    if (spec_.name == EnvName::kPointMaze) {
        if ((pos_ - maze_goal()).norm() < kGoalRadius) {
            reward = 1.0;
            done_ = true;
        }
    } else {
        if (subtasks_done_ < kNumSubtasks) {
            const auto targets = chained_targets();
            if ((pos_ - targets[static_cast<std::size_t>(subtasks_done_)]).norm() < kTargetRadius) {
                reward = 1.0;
                ++subtasks_done_;
                if (subtasks_done_ == kNumSubtasks) done_ = true;
            }
        }
    }

    if (steps_ >= spec_.max_episode_steps) done_ = true;
    return {observation(), reward, done_};
}

}  // namespace serla
