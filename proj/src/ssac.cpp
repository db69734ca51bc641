#include "serla/ssac.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

namespace serla {

void ReplayBuffer::push(SkillTransition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<const SkillTransition*> ReplayBuffer::sample(int batch, Rng& rng) const {
    require(batch >= 1, "ReplayBuffer::sample: batch must be >= 1");
    require(static_cast<std::size_t>(batch) <= data_.size(),
            "ReplayBuffer::sample: batch larger than buffer");
    std::unordered_set<std::size_t> chosen;
    std::vector<const SkillTransition*> out;
    out.reserve(static_cast<std::size_t>(batch));
    while (out.size() < static_cast<std::size_t>(batch)) {
        std::size_t idx = rng.below(data_.size());
        if (chosen.insert(idx).second) out.push_back(&data_[idx]);
    }
    return out;
}

Ssac::Ssac(const SkillModel& prior_model, const SsacConfig& cfg, const EnvSpec& spec, Rng& rng)
    : prior_model_(prior_model), cfg_(cfg), spec_(spec), buffer_(cfg.buffer_capacity),
      kappa_(cfg.kappa_init) {
    const int m = prior_model_.config().skill_dim;
    Rng r_pol = rng.child("policy");
    Rng r_cri = rng.child("critic");
    policy_ = Mlp(spec.state_dim, cfg.hidden, 2 * m, OutputActivation::kLinear, r_pol);
    critic_ = Mlp(spec.state_dim + m, cfg.hidden, 1, OutputActivation::kLinear, r_cri);

    // Warm-start the policy from the frozen prior when the shapes line up, so
    // early exploration already follows prior-guided behavior.
    if (cfg.prior_mode == PriorMode::kLearned) {
        const Mlp& p = prior_model_.prior_net();
        if (p.in_dim() == policy_.in_dim() && p.out_dim() == policy_.out_dim() &&
            p.layers().size() == policy_.layers().size()) {
            bool same = true;
            for (std::size_t i = 0; i < p.layers().size(); ++i) {
                if (p.layers()[i].w.rows() != policy_.layers()[i].w.rows() ||
                    p.layers()[i].w.cols() != policy_.layers()[i].w.cols()) {
                    same = false;
                    break;
                }
            }
            if (same) {
                for (std::size_t i = 0; i < p.layers().size(); ++i) {
                    policy_.layers()[i].w = p.layers()[i].w;
                    policy_.layers()[i].b = p.layers()[i].b;
                }
            }
        }
    }

    target_critic_ = critic_;  // phi_bar starts equal to phi
    opt_policy_ = Adam(policy_, cfg.lr_policy);
    opt_critic_ = Adam(critic_, cfg.lr_critic);
}

DiagGaussian Ssac::policy(const State& s) const {
    return split_gauss_head(policy_.forward(Mat(s))).col(0);
}

DiagGaussian Ssac::prior_dist(const State& s) const {
    if (cfg_.prior_mode == PriorMode::kUniform)
        return DiagGaussian::standard(prior_model_.config().skill_dim);
    return prior_model_.prior(s);
}

double Ssac::q_value(const Mlp& critic, const State& s, const Vec& z) const {
    Vec x(s.size() + z.size());
    x << s, z;
    return critic.forward(Mat(x))(0, 0);
}

int Ssac::collect_skill_step(Env& env, State& obs, Rng& rng) {
    require(!env.done(), "collect_skill_step: episode already finished");
    const int m = prior_model_.config().skill_dim;
    DiagGaussian pi = policy(obs);
    Vec z = reparam_sample(pi, rng);
    Mat actions = prior_model_.decode(z);  // H x action_dim

    State s0 = obs;
    double r_tilde = 0.0;
    int steps = 0;
    for (int i = 0; i < prior_model_.config().horizon && !env.done(); ++i) {
        StepResult sr = env.step(actions.row(i).transpose());
        r_tilde += sr.reward;
        obs = sr.observation;
        ++steps;
    }
    const bool done = env.done();
    buffer_.push({s0, z, r_tilde, obs, done});
    if (cfg_.sde_enabled) {
        // Side stream: toggling the twin must not shift the draws the real
        // rollout consumes, so ablations stay paired on exploration.
        Rng twin_rng = rng.child("sde_twin");
        Vec eps(m);
        for (int i = 0; i < m; ++i) eps[i] = twin_rng.normal();
        buffer_.push({s0, z + cfg_.eta * eps, r_tilde, obs, done});
    }
    return steps;
}

double Ssac::value_target(const State& s_next, Rng& rng) const {
    DiagGaussian pi = split_gauss_head(policy_.forward(Mat(s_next))).col(0);
    Vec z = reparam_sample(pi, rng);
    double q = q_value(target_critic_, s_next, z);
    double kl = kl_diag_gaussian(pi, prior_dist(s_next));
    return q - kappa_ * kl;
}

Vec Ssac::compute_targets(const std::vector<const SkillTransition*>& batch, Rng& rng) const {
    Vec targets(static_cast<int>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& t = *batch[i];
        double v = t.done ? 0.0 : value_target(t.s_next, rng);
        targets[static_cast<int>(i)] = t.r_tilde + cfg_.gamma * (t.done ? 0.0 : v);
    }
    return targets;
}

double Ssac::critic_loss(const std::vector<const SkillTransition*>& batch, const Vec& targets,
                         bool accumulate) {
    const int b = static_cast<int>(batch.size());
    const int m = prior_model_.config().skill_dim;
    Mat x(spec_.state_dim + m, b);
    for (int i = 0; i < b; ++i) x.col(i) << batch[static_cast<std::size_t>(i)]->s,
        batch[static_cast<std::size_t>(i)]->z;
    Mlp::Cache cache;
    Mat q = critic_.forward(x, accumulate ? &cache : nullptr);
    Vec err = q.row(0).transpose() - targets;
    double loss = 0.5 * err.array().square().mean();
    if (accumulate) {
        Mat dq = (err / static_cast<double>(b)).transpose();
        critic_.backward(cache, dq);
    }
    return loss;
}

std::pair<double, double> Ssac::policy_objective(
    const std::vector<const SkillTransition*>& batch, Rng& rng, bool accumulate) {
    const int b = static_cast<int>(batch.size());
    const int m = prior_model_.config().skill_dim;

    Mat states(spec_.state_dim, b);
    for (int i = 0; i < b; ++i) states.col(i) = batch[static_cast<std::size_t>(i)]->s;

    Mlp::Cache pol_cache;
    Mat raw = policy_.forward(states, accumulate ? &pol_cache : nullptr);
    DiagGaussianBatch pi = split_gauss_head(raw);

    Mat noise(m, b);
    for (int j = 0; j < b; ++j)
        for (int i = 0; i < m; ++i) noise(i, j) = rng.normal();
    Mat z = pi.mean.array() + pi.log_std.array().exp() * noise.array();

    Mat x(spec_.state_dim + m, b);
    x << states, z;
    Mlp::Cache cri_cache;
    Mat q = critic_.forward(x, accumulate ? &cri_cache : nullptr);

    DiagGaussianBatch prior;
    if (cfg_.prior_mode == PriorMode::kUniform) {
        prior.mean = Mat::Zero(m, b);
        prior.log_std = Mat::Zero(m, b);
    } else {
        prior = prior_model_.prior_batch(states);
    }
    Vec kls = kl_diag_gaussian_batch(pi, prior);

    const double mean_q = q.row(0).mean();
    const double mean_kl = kls.mean();
    const double objective = mean_q - kappa_ * mean_kl;

    if (accumulate) {
        // Minimize -objective. Q gradients reach the policy through z only;
        // critic parameters stay untouched.
        Mat dq = Mat::Constant(1, b, -1.0 / static_cast<double>(b));
        Mat dx = critic_.backward(cri_cache, dq, /*accumulate_params=*/false);
        Mat dz = dx.bottomRows(m);
        Mat d_mean = dz;
        Mat d_log_std = dz.array() * pi.log_std.array().exp() * noise.array();
        Vec w = Vec::Constant(b, kappa_ / static_cast<double>(b));
        KlGrads g = kl_diag_gaussian_batch_grads(pi, prior, w);
        d_mean += g.d_mean_p;
        d_log_std += g.d_log_std_p;
        policy_.backward(pol_cache, gauss_head_backward(raw, d_mean, d_log_std));
    }
    return {objective, mean_kl};
}

double Ssac::kappa_update(double kappa, double measured_kl, double kappa_target,
                          double lr_kappa) {
    require(kappa > 0.0, "kappa_update: kappa must be positive");
    return kappa * std::exp(lr_kappa * (measured_kl - kappa_target));
}

bool Ssac::gradient_step(Rng& rng, GradStats* stats) {
    if (buffer_.size() < static_cast<std::size_t>(cfg_.batch)) return false;
    Rng batch_rng = rng.child("batch");
    auto batch = buffer_.sample(cfg_.batch, batch_rng);

    Rng target_rng = rng.child("target");
    Vec targets = compute_targets(batch, target_rng);

    policy_.zero_grad();
    Rng pol_rng = rng.child("policy");
    auto [objective, mean_kl] = policy_objective(batch, pol_rng, true);
    opt_policy_.step(policy_);

    critic_.zero_grad();
    double c_loss = critic_loss(batch, targets, true);
    opt_critic_.step(critic_);

    ema_update(target_critic_, critic_, cfg_.tau);
    kappa_ = kappa_update(kappa_, mean_kl, cfg_.kappa_target, cfg_.lr_kappa);

    if (!std::isfinite(objective))
        throw NumericError("ssac: non-finite policy objective");
    if (!std::isfinite(c_loss)) throw NumericError("ssac: non-finite critic loss");
    if (stats) {
        stats->policy_loss = -objective;
        stats->critic_loss = c_loss;
        stats->mean_kl = mean_kl;
    }
    return true;
}

double Ssac::eval_episode(Rng& rng) const {
    Env env(spec_);
    State obs = env.reset(rng);
    double ret = 0.0;
    while (!env.done()) {
        DiagGaussian pi = split_gauss_head(policy_.forward(Mat(obs))).col(0);
        Mat actions = prior_model_.decode(pi.mean);
        for (int i = 0; i < prior_model_.config().horizon && !env.done(); ++i) {
            StepResult sr = env.step(actions.row(i).transpose());
            ret += sr.reward;
            obs = sr.observation;
        }
    }
    return ret;
}

DownstreamResult train_downstream(Ssac& agent, const EnvSpec& spec, Rng& rng) {
    const SsacConfig& cfg = agent.config();
    DownstreamResult result;

    Env env(spec);
    Rng collect_rng = rng.child("collect");
    std::uint64_t episode = 0;
    Rng ep_rng = collect_rng.child(episode);
    State obs = env.reset(ep_rng);

    long env_steps = 0;
    long skill_steps = 0;
    long grad_phase = 0;
    long next_eval = cfg.eval_every_env_steps;
    Ssac::GradStats stats;

    while (env_steps < cfg.total_env_steps) {
        env_steps += agent.collect_skill_step(env, obs, ep_rng);
        ++skill_steps;
        if (env.done()) {
            ++episode;
            ep_rng = collect_rng.child(episode);
            obs = env.reset(ep_rng);
        }

        if (skill_steps >= cfg.warmup_skill_steps) {
            for (int g = 0; g < cfg.grad_steps_per_skill; ++g) {
                Rng gr = rng.child("grad").child(static_cast<std::uint64_t>(grad_phase++));
                agent.gradient_step(gr, &stats);
            }
        }

        if (env_steps >= next_eval || env_steps >= cfg.total_env_steps) {
            Rng eval_rng = rng.child("eval").child(static_cast<std::uint64_t>(next_eval));
            double total = 0.0;
            for (int e = 0; e < cfg.eval_episodes; ++e) {
                Rng er = eval_rng.child(static_cast<std::uint64_t>(e));
                total += agent.eval_episode(er);
            }
            double mean_ret = total / cfg.eval_episodes;
            result.log.push_back({env_steps, mean_ret, mean_ret / spec.max_return,
                                  stats.policy_loss, stats.critic_loss, stats.mean_kl,
                                  agent.kappa()});
            while (next_eval <= env_steps) next_eval += cfg.eval_every_env_steps;
        }
    }
    return result;
}

void write_eval_log_csv(const std::vector<EvalLogRecord>& log,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_eval_log_csv: cannot open " + path.string());
    out << "env_step,mean_return,normalized_return,policy_loss,critic_loss,mean_KL,kappa\n";
    out.precision(17);
    for (const auto& r : log) {
        out << r.env_step << ',' << r.mean_return << ',' << r.normalized_return << ','
            << r.policy_loss << ',' << r.critic_loss << ',' << r.mean_kl << ',' << r.kappa
            << '\n';
    }
}

}  // namespace serla
