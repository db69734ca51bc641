#pragma once

#include <filesystem>

#include "serla/env.hpp"
#include "serla/skillmodel.hpp"

namespace serla {

// One replay record covering H primitive environment steps under one skill.
struct SkillTransition {
    State s;
    Vec z;
    double r_tilde;  // H-step cumulative reward
    State s_next;
    bool done;
};

// FIFO ring buffer; batch sampling is uniform without replacement.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(SkillTransition t);
    std::vector<const SkillTransition*> sample(int batch, Rng& rng) const;

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const SkillTransition& at(std::size_t i) const { return data_[i]; }

private:
    std::vector<SkillTransition> data_;
    std::size_t capacity_;
    std::size_t next_ = 0;  // overwrite cursor once full
};

enum class PriorMode { kLearned, kUniform };

struct SsacConfig {
    double gamma = 0.99;        // discount per skill-level transition
    double tau = 0.005;         // EMA momentum
    double kappa_init = 0.1;
    double kappa_target = 5.0;  // target KL for the dual update
    double lr_kappa = 1e-3;
    double lr_policy = 1e-4;
    double lr_critic = 1e-4;
    double eta = 0.01;          // SDE noise scale
    bool sde_enabled = true;
    PriorMode prior_mode = PriorMode::kLearned;
    int batch = 128;
    int warmup_skill_steps = 50;
    int grad_steps_per_skill = 1;
    std::size_t buffer_capacity = 100000;
    long total_env_steps = 100000;
    long eval_every_env_steps = 1000;
    int eval_episodes = 10;
    std::vector<int> hidden = {128, 128};
};

// Skill-based soft actor-critic with behavior-cloning KL regularization
// toward a frozen prior, a single critic with an EMA target, and a
// log-space dual variable kappa.
class Ssac {
public:
    Ssac(const SkillModel& prior_model, const SsacConfig& cfg, const EnvSpec& spec, Rng& rng);

    // Samples z ~ pi(.|s), decodes H actions, executes up to H env steps, and
    // pushes the transition (plus its SDE-augmented twin when enabled).
    // Returns the number of primitive env steps consumed.
    int collect_skill_step(Env& env, State& obs, Rng& rng);

    // Single-sample value estimate at s_next; no gradient flows anywhere.
    double value_target(const State& s_next, Rng& rng) const;

    // 0.5 * mean (Q - (r + gamma*(1-done)*V(s_next)))^2 over the batch;
    // accumulates critic gradients when requested.
    double critic_loss(const std::vector<const SkillTransition*>& batch, const Vec& targets,
                       bool accumulate);
    Vec compute_targets(const std::vector<const SkillTransition*>& batch, Rng& rng) const;

    // mean Q(s, z~pi) - kappa*KL(pi || prior); maximized. Accumulates policy
    // gradients of the negated objective; returns (objective, mean KL).
    std::pair<double, double> policy_objective(const std::vector<const SkillTransition*>& batch,
                                               Rng& rng, bool accumulate);

    // One gradient phase on a sampled batch. Returns false while warming up.
    struct GradStats {
        double policy_loss = 0.0;
        double critic_loss = 0.0;
        double mean_kl = 0.0;
    };
    bool gradient_step(Rng& rng, GradStats* stats);

    // Greedy rollout: policy mean, decoder mean. Returns episode return.
    double eval_episode(Rng& rng) const;

    DiagGaussian policy(const State& s) const;
    DiagGaussian prior_dist(const State& s) const;

    double kappa() const { return kappa_; }
    void set_kappa(double k) { kappa_ = k; }

    Mlp& policy_net() { return policy_; }
    Mlp& critic_net() { return critic_; }
    Mlp& target_critic_net() { return target_critic_; }
    const Mlp& policy_net() const { return policy_; }
    const Mlp& critic_net() const { return critic_; }
    const Mlp& target_critic_net() const { return target_critic_; }
    ReplayBuffer& buffer() { return buffer_; }
    const SsacConfig& config() const { return cfg_; }
    const SkillModel& skill_model() const { return prior_model_; }

    static double kappa_update(double kappa, double measured_kl, double kappa_target,
                               double lr_kappa);

private:
    double q_value(const Mlp& critic, const State& s, const Vec& z) const;

    SkillModel prior_model_;  // frozen: decoder executes skills, prior regularizes
    SsacConfig cfg_;
    EnvSpec spec_;
    Mlp policy_;         // state -> DiagGaussian over z
    Mlp critic_;         // (state ++ z) -> scalar Q
    Mlp target_critic_;  // EMA copy
    Adam opt_policy_;
    Adam opt_critic_;
    ReplayBuffer buffer_;
    double kappa_;
};

struct EvalLogRecord {
    long env_step;
    double mean_return;
    double normalized_return;
    double policy_loss;
    double critic_loss;
    double mean_kl;
    double kappa;
};

struct DownstreamResult {
    std::vector<EvalLogRecord> log;
};

// Algorithm loop: alternate environment collection with gradient phases,
// evaluating the greedy policy on a fixed cadence.
DownstreamResult train_downstream(Ssac& agent, const EnvSpec& spec, Rng& rng);

void write_eval_log_csv(const std::vector<EvalLogRecord>& log,
                        const std::filesystem::path& path);

}  // namespace serla
