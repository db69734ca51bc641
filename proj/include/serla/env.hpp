#pragma once

#include <array>
#include <string>

#include "serla/rng.hpp"
#include "serla/types.hpp"

namespace serla {

enum class EnvName { kPointMaze, kChainedTargets };

std::string to_string(EnvName name);
EnvName env_name_from_string(const std::string& s);

// Static description of an environment; also serialized into dataset headers.
struct EnvSpec {
    EnvName name;
    int state_dim;
    int action_dim;
    int max_episode_steps;
    double max_return;

    static EnvSpec make(EnvName name);
    bool operator==(const EnvSpec&) const = default;
};

// Arena and dynamics constants shared by both environments.
inline constexpr double kArenaSize = 5.0;
inline constexpr double kDt = 0.1;
inline constexpr double kMaxSpeed = 1.0;
inline constexpr double kGoalRadius = 0.2;
inline constexpr double kResetNoiseRadius = 0.1;
inline constexpr int kNumSubtasks = 4;

struct StepResult {
    State observation;
    double reward;
    bool done;
};

// Point-mass double integrator in a [0,5]^2 arena.
//
// point_maze: one horizontal wall splits the arena into two corridors
// connected through a gap on the right; sparse reward 1 at the goal,
// episode ends on success. Observation: [pos, vel], state_dim 4.
//
// chained_targets: open arena with four target regions that must be
// visited in a fixed order; reward 1 per in-order visit, max return 4.
// Observation: [pos, vel, one-hot(subtasks_done)], state_dim 9.
class Env {
public:
    explicit Env(const EnvSpec& spec);

    State reset(Rng& rng);
    StepResult step(const Action& a);

    const EnvSpec& spec() const { return spec_; }
    bool done() const { return done_; }
    int steps_elapsed() const { return steps_; }
    int subtasks_done() const { return subtasks_done_; }
    Eigen::Vector2d position() const { return pos_; }
    Eigen::Vector2d velocity() const { return vel_; }

    // Layout constants, exposed for the scripted demonstrators.
    static Eigen::Vector2d nominal_start(EnvName name);
    static Eigen::Vector2d maze_goal();
    static double maze_wall_y();       // wall spans x in [0, maze_wall_gap_x]
    static double maze_wall_gap_x();
    static std::array<Eigen::Vector2d, kNumSubtasks> chained_targets();

    // Restores internal state from an observation (used for replay checks).
    void set_state_from_observation(const State& obs);

private:
    State observation() const;

    EnvSpec spec_;
    Eigen::Vector2d pos_{0.0, 0.0};
    Eigen::Vector2d vel_{0.0, 0.0};
    int subtasks_done_ = 0;
    int steps_ = 0;
    bool done_ = true;  // must reset before stepping
};

}  // namespace serla
