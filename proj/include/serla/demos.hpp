#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "serla/env.hpp"
#include "serla/types.hpp"

namespace serla {

enum class DemoKind { kExpert, kGeneral };

std::string to_string(DemoKind kind);
DemoKind demo_kind_from_string(const std::string& s);

// Offline demonstration set; trajectories carry no rewards.
struct DemoDataset {
    EnvSpec spec;
    DemoKind kind;
    std::vector<Trajectory> trajectories;
};

// Scripted waypoint controller used both for expert demonstrations and for
// the goal-directed segments mixed into the general data.
class ScriptedController {
public:
    explicit ScriptedController(const EnvSpec& spec);

    // PD steering toward the current waypoint; advances waypoints as they
    // are reached. Call reset() at episode start.
    void reset();
    Action act(const Env& env);

private:
    EnvSpec spec_;
    std::vector<Eigen::Vector2d> waypoints_;
    std::size_t next_ = 0;
};

// n successful expert episodes (return == max_return), action noise std 0.05.
DemoDataset generate_expert(const EnvSpec& spec, int n, Rng& rng);

// 10 * n_expert trajectories from a momentum random walk interleaved with
// short scripted goal-directed segments.
DemoDataset generate_general(const EnvSpec& spec, int n_expert, Rng& rng);

// Line-delimited JSON: one header object, then one object per trajectory.
void save_dataset(const DemoDataset& ds, const std::filesystem::path& path);
DemoDataset load_dataset(const std::filesystem::path& path);

inline constexpr int kDatasetFormatVersion = 1;

}  // namespace serla
