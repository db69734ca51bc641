#include "serla/demos.hpp"

#include <fstream>

#include <json.hpp>

namespace serla {

namespace {
constexpr double kActionNoiseStd = 0.05;
constexpr double kWaypointRadius = 0.3;
constexpr double kSteerGain = 2.0;     // desired velocity per unit of distance
constexpr double kAccelGain = 5.0;     // action per unit of velocity error
constexpr double kMomentum = 0.8;      // general-data random walk
constexpr double kWalkNoise = 0.6;
constexpr double kScriptProb = 0.02;   // chance per step to start a scripted segment
constexpr int kScriptLen = 5;
}  // namespace

std::string to_string(DemoKind kind) {
    return kind == DemoKind::kExpert ? "expert" : "general";
}

DemoKind demo_kind_from_string(const std::string& s) {
    if (s == "expert") return DemoKind::kExpert;
    if (s == "general") return DemoKind::kGeneral;
    throw ContractError("unknown demo kind: " + s);
}

ScriptedController::ScriptedController(const EnvSpec& spec) : spec_(spec) {
    if (spec.name == EnvName::kPointMaze) {
        // Through the gap on the right of the wall, then to the goal.
        waypoints_ = {{4.5, 1.8}, {4.5, 3.2}, Env::maze_goal()};
    } else {
        const auto targets = Env::chained_targets();
        waypoints_.assign(targets.begin(), targets.end());
    }
}

void ScriptedController::reset() { next_ = 0; }

Action ScriptedController::act(const Env& env) {
    // For chained_targets the environment tracks progress; resync so scripted
    // segments inside general data aim at the right target.
    if (spec_.name == EnvName::kChainedTargets) {
        next_ = static_cast<std::size_t>(env.subtasks_done());
    }
    while (next_ + 1 < waypoints_.size() &&
           (env.position() - waypoints_[next_]).norm() < kWaypointRadius) {
        ++next_;
    }
    const Eigen::Vector2d wp = waypoints_[std::min(next_, waypoints_.size() - 1)];
    Eigen::Vector2d v_des = kSteerGain * (wp - env.position());
    if (double s = v_des.norm(); s > kMaxSpeed) v_des *= kMaxSpeed / s;
    Eigen::Vector2d a = kAccelGain * (v_des - env.velocity());
    Action out(2);
    out[0] = std::clamp(a[0], -1.0, 1.0);
    out[1] = std::clamp(a[1], -1.0, 1.0);
    return out;
}

namespace {

Action with_noise(const Action& a, Rng& rng) {
    Action out = a;
    for (int i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i] + kActionNoiseStd * rng.normal(), -1.0, 1.0);
    return out;
}

struct Rollout {
    Trajectory traj;
    double ret = 0.0;
};

Rollout run_expert_episode(const EnvSpec& spec, Rng& rng) {
    Env env(spec);
    ScriptedController ctl(spec);
    ctl.reset();
    Rollout r;
    r.traj.states.push_back(env.reset(rng));
    while (!env.done()) {
        Action a = with_noise(ctl.act(env), rng);
        StepResult sr = env.step(a);
        r.traj.actions.push_back(a);
        r.traj.states.push_back(sr.observation);
        r.ret += sr.reward;
    }
    return r;
}

}  // namespace

DemoDataset generate_expert(const EnvSpec& spec, int n, Rng& rng) {
    require(n >= 1, "generate_expert: n must be >= 1");
    DemoDataset ds{spec, DemoKind::kExpert, {}};
    int attempts = 0;
    while (static_cast<int>(ds.trajectories.size()) < n) {
        Rng ep = rng.child(static_cast<std::uint64_t>(attempts));
        ++attempts;
        Rollout r = run_expert_episode(spec, ep);
        if (r.ret == spec.max_return) {
            ds.trajectories.push_back(std::move(r.traj));
        }
        if (attempts >= 20 && 2 * static_cast<int>(ds.trajectories.size()) < attempts) {
            throw ConfigurationError(
                "generate_expert: scripted controller failed on more than half of " +
                std::to_string(attempts) + " attempts; environment constants inconsistent");
        }
    }
    return ds;
}

DemoDataset generate_general(const EnvSpec& spec, int n_expert, Rng& rng) {
    require(n_expert >= 1, "generate_general: n_expert must be >= 1");
    DemoDataset ds{spec, DemoKind::kGeneral, {}};
    const int n = 10 * n_expert;
    ds.trajectories.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng ep = rng.child(static_cast<std::uint64_t>(i));
        Env env(spec);
        ScriptedController ctl(spec);
        ctl.reset();
        Trajectory traj;
        traj.states.push_back(env.reset(ep));
        Action a = Action::Zero(spec.action_dim);
        int scripted_left = 0;
        while (!env.done()) {
            if (scripted_left > 0) {
                a = with_noise(ctl.act(env), ep);
                --scripted_left;
            } else {
                for (int k = 0; k < a.size(); ++k) {
                    double u = ep.uniform(-1.0, 1.0);
                    a[k] = std::clamp(kMomentum * a[k] + kWalkNoise * u, -1.0, 1.0);
                }
                if (ep.uniform() < kScriptProb) scripted_left = kScriptLen;
            }
            StepResult sr = env.step(a);
            traj.actions.push_back(a);
            traj.states.push_back(sr.observation);
        }
        ds.trajectories.push_back(std::move(traj));
    }
    return ds;
}

// ---- serialization -------------------------------------------------------

namespace {

using nlohmann::json;

json spec_to_json(const EnvSpec& spec) {
    return json{{"name", to_string(spec.name)},
                {"state_dim", spec.state_dim},
                {"action_dim", spec.action_dim},
                {"max_episode_steps", spec.max_episode_steps},
                {"max_return", spec.max_return}};
}

EnvSpec spec_from_json(const json& j) {
    EnvSpec spec;
    spec.name = env_name_from_string(j.at("name").get<std::string>());
    spec.state_dim = j.at("state_dim").get<int>();
    spec.action_dim = j.at("action_dim").get<int>();
    spec.max_episode_steps = j.at("max_episode_steps").get<int>();
    spec.max_return = j.at("max_return").get<double>();
    return spec;
}

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vec vec_from_json(const json& arr) {
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
    return v;
}

}  // namespace

void save_dataset(const DemoDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_dataset: cannot open " + path.string());
    json header{{"format_version", kDatasetFormatVersion},
                {"env", spec_to_json(ds.spec)},
                {"kind", to_string(ds.kind)},
                {"count", ds.trajectories.size()}};
    out << header.dump() << '\n';
    for (const auto& traj : ds.trajectories) {
        json rec;
        rec["states"] = json::array();
        for (const auto& s : traj.states) rec["states"].push_back(vec_to_json(s));
        rec["actions"] = json::array();
        for (const auto& a : traj.actions) rec["actions"].push_back(vec_to_json(a));
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("save_dataset: write failed for " + path.string());
}

DemoDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_dataset: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw MalformedFileError("load_dataset: empty file " + path.string());

    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object())
        throw MalformedFileError("load_dataset: unparseable header in " + path.string());
    if (!header.contains("format_version"))
        throw MalformedFileError("load_dataset: header missing format_version");
    if (header["format_version"].get<int>() != kDatasetFormatVersion)
        throw VersionMismatchError("load_dataset: format_version " +
                                   header["format_version"].dump() + ", expected " +
                                   std::to_string(kDatasetFormatVersion));

    DemoDataset ds;
    try {
        ds.spec = spec_from_json(header.at("env"));
        ds.kind = demo_kind_from_string(header.at("kind").get<std::string>());
    } catch (const json::exception& e) {
        throw MalformedFileError(std::string("load_dataset: bad header: ") + e.what());
    }
    const std::size_t count = header.at("count").get<std::size_t>();

    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line))
            throw MalformedFileError("load_dataset: truncated file, expected " +
                                     std::to_string(count) + " trajectories, got " +
                                     std::to_string(i));
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object() || !rec.contains("states") ||
            !rec.contains("actions"))
            throw MalformedFileError("load_dataset: unparseable trajectory record " +
                                     std::to_string(i));
        Trajectory traj;
        for (const auto& s : rec["states"]) traj.states.push_back(vec_from_json(s));
        for (const auto& a : rec["actions"]) traj.actions.push_back(vec_from_json(a));
        try {
            traj.validate();
        } catch (const ContractError& e) {
            throw MalformedFileError(std::string("load_dataset: invalid trajectory: ") + e.what());
        }
        for (const auto& s : traj.states) {
            if (s.size() != ds.spec.state_dim)
                throw SpecMismatchError("load_dataset: state dim disagrees with header spec");
        }
        for (const auto& a : traj.actions) {
            if (a.size() != ds.spec.action_dim)
                throw SpecMismatchError("load_dataset: action dim disagrees with header spec");
        }
        ds.trajectories.push_back(std::move(traj));
    }
    return ds;
}

}  // namespace serla
