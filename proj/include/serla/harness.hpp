#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "serla/pulearn.hpp"
#include "serla/ssac.hpp"

namespace serla {

// Every hyperparameter of both stages, parseable from a flat
// `key = value` config file. Unknown keys are errors.
struct TrainConfig {
    std::string env = "point_maze";
    int horizon = 10;
    int skill_dim = 10;
    double lambda = 0.5;
    double xi = 0.0;
    double rho = 0.1;
    double beta = 0.01;
    double alpha = 0.1;
    double eta = 0.01;
    double tau = 0.005;
    double gamma = 0.99;
    double kappa_init = 0.1;
    double kappa_target = 5.0;
    double lr_kappa = 1e-3;
    double prior_lr = 1e-3;
    double disc_lr = 3e-5;
    double disc_weight_decay = 3.0;
    int prior_batch = 64;
    int prior_steps = 20000;
    int prior_log_every = 100;
    double rl_lr_policy = 1e-4;
    double rl_lr_critic = 1e-4;
    int rl_batch = 128;
    int rl_warmup_skill_steps = 50;
    long rl_buffer_capacity = 100000;
    long rl_env_steps = 100000;
    long rl_eval_every = 1000;
    int rl_eval_episodes = 10;
    int n_expert = 50;
    std::uint64_t seed = 0;
    bool sde_skill = true;
    bool sde_downstream = true;
    bool pu_enabled = true;
    std::string prior_mode = "learned";  // learned | uniform

    static TrainConfig from_file(const std::filesystem::path& path);
    void set(const std::string& key, const std::string& value);
    void validate() const;

    // Canonical serialization; its FNV-1a hash identifies the run.
    std::string canonical_string() const;
    std::uint64_t hash() const;

    EnvSpec env_spec() const;
    PriorTrainConfig prior_config() const;
    SsacConfig ssac_config() const;
};

// return / max_return, in [0, 1].
double normalized_return(double ret, const EnvSpec& spec);

struct Curve {
    std::vector<double> steps;
    std::vector<double> values;

    double interpolate(double step) const;
    // Mean of values; evaluation points weighted equally.
    double average_value() const;
};

// Pointwise mean across environments after aligning all curves on the union
// of their step grids (linear interpolation between evaluation points).
Curve mean_normalized_return(const std::vector<Curve>& curves);

// ---- orchestration -------------------------------------------------------

inline constexpr const char* kExpertFile = "expert.jsonl";
inline constexpr const char* kGeneralFile = "general.jsonl";
inline constexpr const char* kPriorCkptFile = "prior.ckpt";
inline constexpr const char* kPriorLogFile = "prior_log.csv";
inline constexpr const char* kPolicyCkptFile = "policy.ckpt";
inline constexpr const char* kRlLogFile = "rl_log.csv";

void cmd_gen_data(const TrainConfig& cfg, const std::filesystem::path& out_dir);
void cmd_train_prior(const TrainConfig& cfg, const std::filesystem::path& data_dir,
                     const std::filesystem::path& out_dir);
void cmd_train_rl(const TrainConfig& cfg, const std::filesystem::path& prior_ckpt,
                  const std::filesystem::path& out_dir);
double cmd_eval(const TrainConfig& cfg, const std::filesystem::path& prior_ckpt,
                const std::filesystem::path& policy_ckpt, int episodes);

// Prior-stage checkpoint holds the skill model, the discriminator, and the
// shape metadata needed to rebuild them.
void save_prior_checkpoint(const std::filesystem::path& path, const SkillModel& model,
                           const Discriminator& disc, std::uint64_t config_hash);
void load_prior_checkpoint(const std::filesystem::path& path, SkillModel* model,
                           Discriminator* disc, std::uint64_t* config_hash);

void save_policy_checkpoint(const std::filesystem::path& path, const Ssac& agent,
                            std::uint64_t config_hash);
void load_policy_checkpoint(const std::filesystem::path& path, Ssac* agent,
                            std::uint64_t* config_hash);

// ---- ablation ------------------------------------------------------------

struct AblationCell {
    double mean_increase = 0.0;  // (avg return - baseline avg return) / baseline
    double std_increase = 0.0;
    bool failed = false;
};

struct AblationTable {
    std::vector<std::string> variants;  // row labels
    std::vector<std::string> envs;      // column labels
    std::vector<std::vector<AblationCell>> cells;  // [variant][env]
};

// Runs the four SDE variants per seed per env and reports the percentage
// increase of each variant's whole-run average return over SeRLA-w/o-SDE.
AblationTable run_ablation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                           const std::vector<std::string>& envs,
                           const std::filesystem::path& work_dir);

void write_ablation_csv(const AblationTable& table, const std::filesystem::path& path);

// ---- plotting ------------------------------------------------------------

Curve read_eval_log_csv(const std::filesystem::path& path);

// Mean curve with a min-max seed band, rendered as SVG, plus a merged CSV of
// the aligned per-log values.
void cmd_plot(const std::vector<std::filesystem::path>& logs,
              const std::filesystem::path& out_svg, const std::filesystem::path& out_csv);

struct RunRecord {
    std::uint64_t config_hash;
    std::uint64_t seed;
    std::vector<std::string> artifacts;
    double wall_clock_seconds;
};

void write_run_record(const RunRecord& rec, const std::filesystem::path& path);

}  // namespace serla
