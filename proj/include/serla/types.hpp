#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "serla/errors.hpp"

namespace serla {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Environment observation; unitless normalized coordinates.
using State = Vec;

// Primitive action, each component in [-1, 1].
using Action = Vec;

// One episode: |states| = |actions| + 1. Demonstration data carries no
// rewards; rewards are only present for online rollouts.
struct Trajectory {
    std::vector<State> states;
    std::vector<Action> actions;
    std::optional<std::vector<double>> rewards;

    void validate() const {
        require(states.size() == actions.size() + 1,
                "Trajectory: |states| must equal |actions| + 1");
        if (rewards) {
            require(rewards->size() == actions.size(),
                    "Trajectory: rewards length must equal |actions|");
        }
    }
};

// One skill-model training example: the start state paired with the next
// H actions, stored as an H x action_dim matrix (one action per row).
struct SkillWindow {
    State start_state;
    Mat actions;
};

// Extracts every length-H window from a trajectory. Trajectories shorter
// than H actions yield an empty list.
inline std::vector<SkillWindow> extract_windows(const Trajectory& traj, int horizon) {
    require(horizon >= 1, "extract_windows: H must be >= 1");
    traj.validate();
    std::vector<SkillWindow> out;
    const int n_actions = static_cast<int>(traj.actions.size());
    if (n_actions < horizon) return out;
    const int action_dim = static_cast<int>(traj.actions[0].size());
    out.reserve(static_cast<std::size_t>(n_actions - horizon + 1));
    for (int t = 0; t + horizon <= n_actions; ++t) {
        SkillWindow w;
        w.start_state = traj.states[static_cast<std::size_t>(t)];
        w.actions.resize(horizon, action_dim);
        for (int i = 0; i < horizon; ++i) {
            w.actions.row(i) = traj.actions[static_cast<std::size_t>(t + i)].transpose();
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace serla
