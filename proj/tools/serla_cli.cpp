// Command-line front end over the SeRLA C API.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "serla/serla.h"

namespace {

struct ConfigHandle {
    serla_config* cfg = serla_config_create();
    ~ConfigHandle() { serla_config_free(cfg); }
};

int fail(serla_status status) {
    std::fprintf(stderr, "error (%s): %s\n", serla_status_name(status), serla_last_error());
    return 1;
}

// Applies --config and --set options; command-specific convenience flags were
// already turned into set() pairs by the caller.
int apply_config(ConfigHandle& h, const std::string& config_file,
                 const std::vector<std::pair<std::string, std::string>>& sets) {
    if (!config_file.empty()) {
        if (auto s = serla_config_load_file(h.cfg, config_file.c_str()); s != SERLA_OK)
            return fail(s);
    }
    for (const auto& [k, v] : sets) {
        if (auto s = serla_config_set(h.cfg, k.c_str(), v.c_str()); s != SERLA_OK)
            return fail(s);
    }
    return 0;
}

std::vector<std::pair<std::string, std::string>> parse_sets(
    const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : raw) {
        auto eq = s.find('=');
        if (eq == std::string::npos) {
            out.emplace_back(s, "");  // let the library reject it with a clear message
        } else {
            out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SeRLA: skill-prior learning from heterogeneous demonstrations "
                 "and skill-based soft actor-critic training"};
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::string> raw_sets;
    app.add_option("--config", config_file, "config file (key = value lines)");
    app.add_option("--set", raw_sets, "override a config key, e.g. --set seed=7")
        ->take_all();

    std::string env, out_dir = ".", data_dir = ".", prior_ckpt, policy_ckpt;
    long n_expert = -1, seed = -1, env_steps = -1, prior_steps = -1;
    int episodes = 10;
    std::vector<std::string> seeds_csv{"0", "1"};
    std::vector<std::string> envs_csv{"point_maze", "chained_targets"};
    std::string work_dir = "ablation_work", out_csv = "ablation.csv";
    std::vector<std::string> log_paths;
    std::string plot_svg = "returns.svg", plot_csv = "returns.csv";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--env", env, "environment: point_maze | chained_targets");
        cmd->add_option("--seed", seed, "random seed");
    };

    auto* gen = app.add_subcommand("gen-data", "generate expert + general demonstration sets");
    add_common(gen);
    gen->add_option("--n-expert", n_expert, "number of expert trajectories");
    gen->add_option("--out", out_dir, "output directory");

    auto* tp = app.add_subcommand("train-prior", "train the skill prior (offline stage)");
    add_common(tp);
    tp->add_option("--data", data_dir, "directory holding expert.jsonl/general.jsonl");
    tp->add_option("--out", out_dir, "output directory");
    tp->add_option("--steps", prior_steps, "prior training iterations");

    auto* tr = app.add_subcommand("train-rl", "train the skill policy (online stage)");
    add_common(tr);
    tr->add_option("--prior", prior_ckpt, "prior checkpoint from train-prior")->required();
    tr->add_option("--out", out_dir, "output directory");
    tr->add_option("--env-steps", env_steps, "total environment steps");

    auto* ev = app.add_subcommand("eval", "evaluate a policy checkpoint greedily");
    add_common(ev);
    ev->add_option("--prior", prior_ckpt, "prior checkpoint")->required();
    ev->add_option("--policy", policy_ckpt, "policy checkpoint (omit for untrained)");
    ev->add_option("--episodes", episodes, "evaluation episodes");

    auto* ab = app.add_subcommand("ablate", "run the SDE ablation grid");
    add_common(ab);
    ab->add_option("--seeds", seeds_csv, "seeds, e.g. --seeds 0 1 2")->take_all();
    ab->add_option("--envs", envs_csv, "environments")->take_all();
    ab->add_option("--work-dir", work_dir, "scratch directory");
    ab->add_option("--out", out_csv, "output table CSV");

    auto* pl = app.add_subcommand("plot", "render return curves from eval logs");
    pl->add_option("logs", log_paths, "eval-log CSV files")->required()->take_all();
    pl->add_option("--out-svg", plot_svg, "output image");
    pl->add_option("--out-csv", plot_csv, "output merged table");

    CLI11_PARSE(app, argc, argv);

    auto sets = parse_sets(raw_sets);
    if (!env.empty()) sets.emplace_back("env", env);
    if (seed >= 0) sets.emplace_back("seed", std::to_string(seed));
    if (n_expert >= 0) sets.emplace_back("n_expert", std::to_string(n_expert));
    if (env_steps >= 0) sets.emplace_back("rl_env_steps", std::to_string(env_steps));
    if (prior_steps >= 0) sets.emplace_back("prior_steps", std::to_string(prior_steps));

    ConfigHandle h;
    if (int rc = apply_config(h, config_file, sets); rc != 0) return rc;

    if (gen->parsed()) {
        if (auto s = serla_gen_data(h.cfg, out_dir.c_str()); s != SERLA_OK) return fail(s);
        std::printf("datasets written to %s\n", out_dir.c_str());
    } else if (tp->parsed()) {
        if (auto s = serla_train_prior(h.cfg, data_dir.c_str(), out_dir.c_str());
            s != SERLA_OK)
            return fail(s);
        std::printf("prior checkpoint and log written to %s\n", out_dir.c_str());
    } else if (tr->parsed()) {
        if (auto s = serla_train_rl(h.cfg, prior_ckpt.c_str(), out_dir.c_str());
            s != SERLA_OK)
            return fail(s);
        std::printf("policy checkpoint and log written to %s\n", out_dir.c_str());
    } else if (ev->parsed()) {
        double mean_return = 0.0;
        const char* pc = policy_ckpt.empty() ? nullptr : policy_ckpt.c_str();
        if (auto s = serla_eval(h.cfg, prior_ckpt.c_str(), pc, episodes, &mean_return);
            s != SERLA_OK)
            return fail(s);
        std::printf("mean return over %d episodes: %.6f\n", episodes, mean_return);
    } else if (ab->parsed()) {
        std::vector<unsigned long long> seeds;
        for (const auto& s : seeds_csv) seeds.push_back(std::stoull(s));
        std::vector<const char*> env_ptrs;
        for (const auto& e : envs_csv) env_ptrs.push_back(e.c_str());
        if (auto s = serla_ablate(h.cfg, seeds.data(), static_cast<int>(seeds.size()),
                                  env_ptrs.data(), static_cast<int>(env_ptrs.size()),
                                  work_dir.c_str(), out_csv.c_str());
            s != SERLA_OK)
            return fail(s);
        std::printf("ablation table written to %s\n", out_csv.c_str());
    } else if (pl->parsed()) {
        std::vector<const char*> ptrs;
        for (const auto& p : log_paths) ptrs.push_back(p.c_str());
        if (auto s = serla_plot(ptrs.data(), static_cast<int>(ptrs.size()), plot_svg.c_str(),
                                plot_csv.c_str());
            s != SERLA_OK)
            return fail(s);
        std::printf("plot written to %s, table to %s\n", plot_svg.c_str(), plot_csv.c_str());
    }
    return 0;
}
