#include "serla/pulearn.hpp"

#include <cmath>
#include <fstream>

namespace serla {

Discriminator::Discriminator(int skill_dim, const std::vector<int>& hidden, Rng& rng) {
    net_ = Mlp(skill_dim, hidden, 1, OutputActivation::kLinear, rng);
}

namespace {

inline double clamp_prob(double p) {
    return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

Vec probs_from_logits(const Mat& logits) {
    Vec p(logits.cols());
    for (int j = 0; j < logits.cols(); ++j)
        p[j] = clamp_prob(1.0 / (1.0 + std::exp(-logits(0, j))));
    return p;
}

}  // namespace

double Discriminator::discriminate(const Vec& z) const {
    require(z.size() == net_.in_dim(), "discriminate: skill dimension mismatch");
    return clamp_prob(1.0 / (1.0 + std::exp(-net_.forward(Mat(z))(0, 0))));
}

Vec Discriminator::discriminate_batch(const Mat& z) const {
    require(z.rows() == net_.in_dim(), "discriminate_batch: skill dimension mismatch");
    return probs_from_logits(net_.forward(z));
}

PuRiskResult pu_risk(const Discriminator& disc, const Mat& z_pos, const Mat& z_unl,
                     const PuConfig& cfg) {
    require(z_pos.cols() > 0 && z_unl.cols() > 0, "pu_risk: empty batch");
    Vec p_pos = disc.discriminate_batch(z_pos);
    Vec p_unl = disc.discriminate_batch(z_unl);
    PuRiskResult r;
    r.l1 = (1.0 - p_pos.array()).log().mean();
    r.l0_pos = p_pos.array().log().mean();
    r.l0_unl = p_unl.array().log().mean();
    const double inner = r.l0_unl - cfg.lambda * r.l0_pos;
    r.clamp_active = inner < -cfg.xi;
    r.value = cfg.lambda * r.l1 + std::max(-cfg.xi, inner);
    r.d_pos_mean = p_pos.mean();
    r.d_unl_mean = p_unl.mean();
    return r;
}

PuRiskResult pu_risk_backward(Discriminator& disc, const Mat& z_pos, const Mat& z_unl,
                              const PuConfig& cfg, double scale, bool accumulate_params,
                              Mat* dz_pos, Mat* dz_unl) {
    require(z_pos.cols() > 0 && z_unl.cols() > 0, "pu_risk: empty batch");
    Mlp::Cache cache_pos, cache_unl;
    Mat logit_pos = disc.net().forward(z_pos, &cache_pos);
    Mat logit_unl = disc.net().forward(z_unl, &cache_unl);
    Vec p_pos = probs_from_logits(logit_pos);
    Vec p_unl = probs_from_logits(logit_unl);

    PuRiskResult r;
    r.l1 = (1.0 - p_pos.array()).log().mean();
    r.l0_pos = p_pos.array().log().mean();
    r.l0_unl = p_unl.array().log().mean();
    const double inner = r.l0_unl - cfg.lambda * r.l0_pos;
    r.clamp_active = inner < -cfg.xi;
    r.value = cfg.lambda * r.l1 + std::max(-cfg.xi, inner);
    r.d_pos_mean = p_pos.mean();
    r.d_unl_mean = p_unl.mean();

    const double n_pos = static_cast<double>(z_pos.cols());
    const double n_unl = static_cast<double>(z_unl.cols());
    Mat df_pos(1, z_pos.cols());
    Mat df_unl(1, z_unl.cols());
    for (int j = 0; j < z_pos.cols(); ++j) {
        const double p = p_pos[j];
        // Probability clamp kills the gradient where it saturates.
        const bool sat = (p <= kProbClamp || p >= 1.0 - kProbClamp);
        double g = sat ? 0.0 : -cfg.lambda * p / n_pos;         // from lambda * log(1-D)
        if (!r.clamp_active && !sat) g += -cfg.lambda * (1.0 - p) / n_pos;  // from -lambda*L0(pos)
        df_pos(0, j) = scale * g;
    }
    for (int j = 0; j < z_unl.cols(); ++j) {
        const double p = p_unl[j];
        const bool sat = (p <= kProbClamp || p >= 1.0 - kProbClamp);
        double g = (!r.clamp_active && !sat) ? (1.0 - p) / n_unl : 0.0;  // from L0(unl)
        df_unl(0, j) = scale * g;
    }

    Mat dz_p = disc.net().backward(cache_pos, df_pos, accumulate_params);
    Mat dz_u = disc.net().backward(cache_unl, df_unl, accumulate_params);
    if (dz_pos) *dz_pos = std::move(dz_p);
    if (dz_unl) *dz_unl = std::move(dz_u);
    return r;
}

JointObjectiveValue joint_prior_objective(SkillModel& model, Discriminator& disc,
                                          const Mat& expert_windows, const Mat& expert_states,
                                          const Mat& general_windows,
                                          const PriorTrainConfig& cfg, Rng& rng,
                                          bool accumulate) {
    const int m = model.config().skill_dim;
    JointObjectiveValue v{};

    {
        Rng r = rng.child("rec");
        Mat noise = model.draw_noise(m, static_cast<int>(expert_windows.cols()), r);
        v.l_rec = model.loss_rec(expert_windows, noise, accumulate);
    }
    v.l_prior = model.loss_prior(expert_windows, expert_states, accumulate);
    v.l_reg = model.loss_reg(expert_windows, accumulate, cfg.beta);

    v.l_rec_sde = 0.0;
    if (cfg.sde_enabled) {
        Rng r = rng.child("sde");
        Mat noise = model.draw_noise(m, static_cast<int>(expert_windows.cols()), r);
        Mat sde_noise = model.draw_noise(m, static_cast<int>(expert_windows.cols()), r);
        v.l_rec_sde = model.loss_rec_sde(expert_windows, noise, sde_noise, cfg.eta,
                                         accumulate, cfg.alpha);
    }

    v.l_pu = 0.0;
    v.discriminator = 0.0;
    if (cfg.pu_enabled) {
        Rng r = rng.child("pu");
        Mat noise_pos = model.draw_noise(m, static_cast<int>(expert_windows.cols()), r);
        Mat noise_unl = model.draw_noise(m, static_cast<int>(general_windows.cols()), r);
        auto enc_pos = model.encode_sample(expert_windows, noise_pos);
        auto enc_unl = model.encode_sample(general_windows, noise_unl);
        if (accumulate) {
            // Generator side: encoder maximizes the PU risk through the
            // -rho sign; skills carry gradient, discriminator params do not.
            Mat dz_pos, dz_unl;
            PuRiskResult pr = pu_risk_backward(disc, enc_pos.z, enc_unl.z, cfg.pu,
                                               -cfg.pu.rho, /*accumulate_params=*/false,
                                               &dz_pos, &dz_unl);
            model.backprop_skill_grad(enc_pos, dz_pos);
            model.backprop_skill_grad(enc_unl, dz_unl);
            v.l_pu = pr.value;
            // Discriminator side: same detached samples, minimize the risk.
            pu_risk_backward(disc, enc_pos.z, enc_unl.z, cfg.pu, 1.0,
                             /*accumulate_params=*/true, nullptr, nullptr);
            v.discriminator = pr.value;
        } else {
            PuRiskResult pr = pu_risk(disc, enc_pos.z, enc_unl.z, cfg.pu);
            v.l_pu = pr.value;
            v.discriminator = pr.value;
        }
    }

    v.generator = v.l_rec + v.l_prior + cfg.beta * v.l_reg + cfg.alpha * v.l_rec_sde -
                  cfg.pu.rho * v.l_pu;
    return v;
}

WindowPool WindowPool::build(const DemoDataset& ds, int horizon) {
    std::vector<SkillWindow> all;
    for (const auto& traj : ds.trajectories) {
        auto w = extract_windows(traj, horizon);
        all.insert(all.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
    }
    require(!all.empty(), "WindowPool: no windows of length H in dataset");
    WindowPool pool;
    pool.windows = flatten_windows(all);
    pool.states = stack_states(all);
    return pool;
}

namespace {

void sample_columns(const WindowPool& pool, int batch, Rng& rng, Mat* windows, Mat* states) {
    windows->resize(pool.windows.rows(), batch);
    if (states) states->resize(pool.states.rows(), batch);
    for (int j = 0; j < batch; ++j) {
        int idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(pool.size())));
        windows->col(j) = pool.windows.col(idx);
        if (states) states->col(j) = pool.states.col(idx);
    }
}

void check_finite(double v, const char* term, int step) {
    if (!std::isfinite(v)) {
        throw NumericError(std::string("train_prior: non-finite ") + term + " at step " +
                           std::to_string(step));
    }
}

}  // namespace

PriorTrainResult train_prior(const DemoDataset& expert, const DemoDataset& general,
                             const PriorTrainConfig& cfg, Rng& rng) {
    require(!expert.trajectories.empty() && !general.trajectories.empty(),
            "train_prior: datasets must be nonempty");
    WindowPool expert_pool = WindowPool::build(expert, cfg.model.horizon);
    WindowPool general_pool = WindowPool::build(general, cfg.model.horizon);

    Rng init_rng = rng.child("init");
    Rng disc_rng = init_rng.child("disc");
    PriorTrainResult result{SkillModel(cfg.model, init_rng),
                            Discriminator(cfg.model.skill_dim, cfg.disc_hidden, disc_rng),
                            {}};
    SkillModel& model = result.model;
    Discriminator& disc = result.disc;

    Adam opt_enc(model.encoder(), cfg.lr);
    Adam opt_dec(model.decoder(), cfg.lr);
    Adam opt_pri(model.prior_net(), cfg.lr);
    Adam opt_disc(disc.net(), cfg.disc_lr, 0.9, 0.999, 1e-8, cfg.disc_weight_decay);

    for (int step = 0; step < cfg.steps; ++step) {
        Rng it = rng.child("step").child(static_cast<std::uint64_t>(step));
        Mat wb, sb, gb;
        {
            Rng r = it.child("expert_batch");
            sample_columns(expert_pool, cfg.batch, r, &wb, &sb);
        }
        {
            Rng r = it.child("general_batch");
            sample_columns(general_pool, cfg.batch, r, &gb, nullptr);
        }

        model.zero_grad();
        disc.net().zero_grad();
        Rng noise_rng = it.child("noise");
        JointObjectiveValue jv =
            joint_prior_objective(model, disc, wb, sb, gb, cfg, noise_rng, true);

        check_finite(jv.l_rec, "L_rec", step);
        check_finite(jv.l_prior, "L_prior", step);
        check_finite(jv.l_reg, "L_reg", step);
        check_finite(jv.l_rec_sde, "L_rec_sde", step);
        check_finite(jv.l_pu, "L_pu", step);

        opt_enc.step(model.encoder());
        opt_dec.step(model.decoder());
        opt_pri.step(model.prior_net());
        if (cfg.pu_enabled) opt_disc.step(disc.net());

        if (step % cfg.log_every == 0 || step + 1 == cfg.steps) {
            double d_pos = 0.0, d_unl = 0.0;
            if (cfg.pu_enabled) {
                Rng r = it.child("noise").child("pu");
                Mat np = model.draw_noise(cfg.model.skill_dim, static_cast<int>(wb.cols()), r);
                Mat nu = model.draw_noise(cfg.model.skill_dim, static_cast<int>(gb.cols()), r);
                d_pos = disc.discriminate_batch(model.encode_sample(wb, np).z).mean();
                d_unl = disc.discriminate_batch(model.encode_sample(gb, nu).z).mean();
            }
            result.log.push_back({step, jv.l_rec, jv.l_prior, jv.l_reg, jv.l_rec_sde,
                                  jv.l_pu, d_pos, d_unl});
        }
    }
    return result;
}

void write_prior_log_csv(const std::vector<PriorLogRecord>& log,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_prior_log_csv: cannot open " + path.string());
    out << "step,L_rec,L_prior,L_reg,L_rec_sde,L_pu,D_pos_mean,D_unl_mean\n";
    out.precision(17);
    for (const auto& r : log) {
        out << r.step << ',' << r.l_rec << ',' << r.l_prior << ',' << r.l_reg << ','
            << r.l_rec_sde << ',' << r.l_pu << ',' << r.d_pos_mean << ',' << r.d_unl_mean
            << '\n';
    }
}

}  // namespace serla
