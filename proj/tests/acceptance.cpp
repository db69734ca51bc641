// Acceptance suite: one pass/fail line per criterion. Budgets follow the
// pinned targets; pass --fast to shrink them for a smoke run (the fast mode
// is for development only and is not what CI should gate on).

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

#include "serla/checkpoint.hpp"
#include "serla/harness.hpp"

using namespace serla;
namespace fs = std::filesystem;

namespace {

bool g_fast = false;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

Mat normal_mat(int rows, int cols, Rng& rng) {
    Mat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

double max_rel_err(const Vec& analytic, const std::function<double()>& eval, Mlp& net,
                   double step = 1e-5) {
    Vec base = net.flatten_params();
    double worst = 0.0;
    for (int i = 0; i < base.size(); ++i) {
        Vec p = base;
        p[i] = base[i] + step;
        net.set_params(p);
        double hi = eval();
        p[i] = base[i] - step;
        net.set_params(p);
        double lo = eval();
        double fd = (hi - lo) / (2.0 * step);
        double denom = std::max({1e-6, std::abs(fd), std::abs(analytic[i])});
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    net.set_params(base);
    return worst;
}

// ---- criterion 1: math oracles -------------------------------------------

void criterion_math_oracles() {
    // KL closed form vs Monte-Carlo estimate, 1e5 samples, |delta| < 1e-2.
    Rng rng(1001);
    DiagGaussian p, q;
    p.mean = Vec::NullaryExpr(10, [&](int) { return rng.uniform(-2.0, 2.0); });
    p.log_std = Vec::NullaryExpr(10, [&](int) { return rng.uniform(-1.0, 0.5); });
    q.mean = Vec::NullaryExpr(10, [&](int) { return rng.uniform(-2.0, 2.0); });
    q.log_std = Vec::NullaryExpr(10, [&](int) { return rng.uniform(-1.0, 0.5); });
    auto log_pdf = [](const DiagGaussian& g, const Vec& x) {
        double lp = 0.0;
        for (int i = 0; i < g.dim(); ++i) {
            double s = std::exp(g.log_std[i]);
            double d = (x[i] - g.mean[i]) / s;
            lp += -0.5 * d * d - g.log_std[i] - 0.5 * std::log(2.0 * M_PI);
        }
        return lp;
    };
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        Vec x = reparam_sample(p, rng);
        acc += log_pdf(p, x) - log_pdf(q, x);
    }
    double mc = acc / n;
    expect(std::abs(kl_diag_gaussian(p, q) - mc) < 1e-2,
           "kl_diag_gaussian deviates from the Monte-Carlo oracle by >= 1e-2");

    // pu_risk vs brute-force per-sample oracle, |delta| < 1e-10.
    Rng drng(1002);
    Discriminator disc(4, {16, 16}, drng);
    Rng zrng(1003);
    for (int trial = 0; trial < 20; ++trial) {
        Mat z_pos = normal_mat(4, 6, zrng);
        Mat z_unl = normal_mat(4, 9, zrng);
        PuConfig cfg;
        cfg.lambda = zrng.uniform(0.1, 0.9);
        cfg.xi = zrng.uniform(0.0, 1.0);
        double l1 = 0.0, l0p = 0.0, l0u = 0.0;
        for (int j = 0; j < z_pos.cols(); ++j) {
            double d = disc.discriminate(z_pos.col(j));
            l1 += std::log(1.0 - d);
            l0p += std::log(d);
        }
        for (int j = 0; j < z_unl.cols(); ++j) l0u += std::log(disc.discriminate(z_unl.col(j)));
        l1 /= z_pos.cols();
        l0p /= z_pos.cols();
        l0u /= z_unl.cols();
        double oracle = cfg.lambda * l1 + std::max(-cfg.xi, l0u - cfg.lambda * l0p);
        expect(std::abs(pu_risk(disc, z_pos, z_unl, cfg).value - oracle) < 1e-10,
               "pu_risk deviates from the brute-force oracle by >= 1e-10");
    }

    // constant D = 1/2, lambda = 1/2, xi = 0: risk = 0.5 * ln 0.5 exactly.
    Discriminator zero_disc(3, {8}, drng);
    zero_disc.net().set_params(Vec::Zero(zero_disc.net().param_count()));
    Mat za = normal_mat(3, 11, zrng), zb = normal_mat(3, 7, zrng);
    PuConfig half;  // lambda 0.5, xi 0
    expect(std::abs(pu_risk(zero_disc, za, zb, half).value - 0.5 * std::log(0.5)) < 1e-9,
           "constant-discriminator pu_risk differs from 0.5*ln(0.5) by >= 1e-9");
}

// ---- criterion 2: gradient suite -----------------------------------------

void criterion_gradients() {
    const double kTol = 1e-4;
    SkillModelConfig mcfg;
    mcfg.horizon = 2;
    mcfg.skill_dim = 2;
    mcfg.state_dim = 3;
    mcfg.action_dim = 1;
    mcfg.hidden = {8};

    Rng rng(2001);
    SkillModel model(mcfg, rng);
    Rng data(2002);
    Mat windows = normal_mat(2, 3, data) * 0.5;
    Mat states = normal_mat(3, 3, data);
    Mat noise = normal_mat(2, 3, data);
    Mat sde_noise = normal_mat(2, 3, data);

    // reconstruction loss
    model.zero_grad();
    model.loss_rec(windows, noise, true);
    auto eval_rec = [&] { return model.loss_rec(windows, noise, false); };
    expect(max_rel_err(model.encoder().flatten_grads(), eval_rec, model.encoder()) < kTol,
           "reconstruction gradient (encoder) fails finite differences");
    expect(max_rel_err(model.decoder().flatten_grads(), eval_rec, model.decoder()) < kTol,
           "reconstruction gradient (decoder) fails finite differences");

    // prior regression loss
    model.zero_grad();
    model.loss_prior(windows, states, true);
    auto eval_prior = [&] { return model.loss_prior(windows, states, false); };
    expect(max_rel_err(model.prior_net().flatten_grads(), eval_prior, model.prior_net()) < kTol,
           "prior-regression gradient fails finite differences");

    // posterior regularization
    model.zero_grad();
    model.loss_reg(windows, true);
    auto eval_reg = [&] { return model.loss_reg(windows, false); };
    expect(max_rel_err(model.encoder().flatten_grads(), eval_reg, model.encoder()) < kTol,
           "regularization gradient fails finite differences");

    // SDE auxiliary reconstruction
    model.zero_grad();
    model.loss_rec_sde(windows, noise, sde_noise, 0.05, true);
    auto eval_sde = [&] { return model.loss_rec_sde(windows, noise, sde_noise, 0.05, false); };
    expect(max_rel_err(model.encoder().flatten_grads(), eval_sde, model.encoder()) < kTol,
           "sde reconstruction gradient fails finite differences");

    // PU risk, both hinge regimes
    Rng drng(2003);
    for (double xi : {5.0, 0.0}) {
        Discriminator disc(2, {8}, drng);
        PuConfig pcfg;
        pcfg.xi = xi;
        Mat z_pos = normal_mat(2, 4, data);
        Mat z_unl = normal_mat(2, 4, data);
        disc.net().zero_grad();
        pu_risk_backward(disc, z_pos, z_unl, pcfg, 1.0, true, nullptr, nullptr);
        Vec g = disc.net().flatten_grads();
        auto eval_pu = [&] { return pu_risk(disc, z_pos, z_unl, pcfg).value; };
        expect(max_rel_err(g, eval_pu, disc.net(), 1e-6) < kTol,
               "pu risk gradient fails finite differences");
    }

    // downstream: policy objective and critic loss
    EnvSpec spec = EnvSpec::make(EnvName::kPointMaze);
    SkillModelConfig pcfg;
    pcfg.horizon = 5;
    pcfg.skill_dim = 3;
    pcfg.state_dim = spec.state_dim;
    pcfg.action_dim = spec.action_dim;
    pcfg.hidden = {16};
    Rng prng(2004);
    SkillModel prior(pcfg, prng);
    SsacConfig scfg;
    scfg.hidden = {16};
    Rng arng(2005);
    Ssac agent(prior, scfg, spec, arng);
    agent.set_kappa(0.3);

    Rng trng(2006);
    std::vector<SkillTransition> store;
    for (int i = 0; i < 3; ++i) {
        SkillTransition t;
        t.s = Vec::NullaryExpr(4, [&](int) { return trng.uniform(0.0, 5.0); });
        t.z = Vec::NullaryExpr(3, [&](int) { return trng.normal(); });
        t.r_tilde = trng.uniform(0.0, 1.0);
        t.s_next = Vec::NullaryExpr(4, [&](int) { return trng.uniform(0.0, 5.0); });
        t.done = false;
        store.push_back(t);
    }
    std::vector<const SkillTransition*> batch;
    for (auto& t : store) batch.push_back(&t);

    agent.policy_net().zero_grad();
    Rng r1(2007);
    agent.policy_objective(batch, r1, true);
    auto eval_pol = [&] {
        Rng r(2007);
        return -agent.policy_objective(batch, r, false).first;
    };
    expect(max_rel_err(agent.policy_net().flatten_grads(), eval_pol, agent.policy_net()) < kTol,
           "policy objective gradient fails finite differences");

    Vec targets(3);
    targets << 0.4, -0.2, 1.0;
    agent.critic_net().zero_grad();
    agent.critic_loss(batch, targets, true);
    auto eval_cri = [&] { return agent.critic_loss(batch, targets, false); };
    expect(max_rel_err(agent.critic_net().flatten_grads(), eval_cri, agent.critic_net()) < kTol,
           "critic loss gradient fails finite differences");
}

// ---- criterion 3: structural invariants ----------------------------------

void criterion_structure() {
    // hinge lower bound on 1e4 random inputs
    Rng drng(3001);
    Discriminator disc(3, {16}, drng);
    Rng zrng(3002);
    for (int i = 0; i < 10000; ++i) {
        Mat z_pos = normal_mat(3, 2, zrng);
        Mat z_unl = normal_mat(3, 2, zrng);
        PuConfig cfg;
        cfg.lambda = zrng.uniform(0.05, 0.95);
        cfg.xi = zrng.uniform(0.0, 0.5);
        PuRiskResult r = pu_risk(disc, z_pos, z_unl, cfg);
        expect(r.value - cfg.lambda * r.l1 >= -cfg.xi - 1e-12,
               "pu hinge went below -xi");
    }

    // stop-gradient contracts
    SkillModelConfig mcfg;
    mcfg.horizon = 2;
    mcfg.skill_dim = 2;
    mcfg.state_dim = 3;
    mcfg.action_dim = 1;
    mcfg.hidden = {8};
    Rng rng(3003);
    SkillModel model(mcfg, rng);
    Rng data(3004);
    Mat windows = normal_mat(2, 3, data);
    Mat states = normal_mat(3, 3, data);

    model.zero_grad();
    model.loss_prior(windows, states, true);
    expect(model.encoder().flatten_grads().norm() == 0.0,
           "loss_prior leaked gradient into the encoder");

    Discriminator d2(2, {8}, rng);
    d2.net().zero_grad();
    Mat z = normal_mat(2, 3, data);
    pu_risk_backward(d2, z, z, PuConfig{}, 1.0, false, nullptr, nullptr);
    expect(d2.net().flatten_grads().norm() == 0.0,
           "detached discriminator pass accumulated parameter gradients");

    EnvSpec spec = EnvSpec::make(EnvName::kPointMaze);
    SkillModelConfig pcfg;
    pcfg.horizon = 5;
    pcfg.skill_dim = 3;
    pcfg.state_dim = spec.state_dim;
    pcfg.action_dim = spec.action_dim;
    pcfg.hidden = {16};
    Rng prng(3005);
    SkillModel prior(pcfg, prng);
    SsacConfig scfg;
    scfg.hidden = {16};
    Rng arng(3006);
    Ssac agent(prior, scfg, spec, arng);
    std::vector<SkillTransition> store;
    Rng trng(3007);
    for (int i = 0; i < 3; ++i) {
        SkillTransition t;
        t.s = Vec::NullaryExpr(4, [&](int) { return trng.uniform(0.0, 5.0); });
        t.z = Vec::NullaryExpr(3, [&](int) { return trng.normal(); });
        t.r_tilde = 0.0;
        t.s_next = t.s;
        t.done = false;
        store.push_back(t);
    }
    std::vector<const SkillTransition*> batch;
    for (auto& t : store) batch.push_back(&t);
    agent.policy_net().zero_grad();
    agent.critic_net().zero_grad();
    Rng orng(3008);
    agent.policy_objective(batch, orng, true);
    expect(agent.critic_net().flatten_grads().norm() == 0.0,
           "policy objective leaked gradient into the critic");

    // buffer doubling: k skill steps store 2k transitions with SDE enabled
    {
        Rng arng2(3009);
        SsacConfig scfg2 = scfg;
        Ssac agent2(prior, scfg2, spec, arng2);
        Env env(spec);
        Rng erng(3010);
        State obs = env.reset(erng);
        const int k = 7;
        for (int i = 0; i < k; ++i) {
            if (env.done()) obs = env.reset(erng);
            agent2.collect_skill_step(env, obs, erng);
        }
        expect(agent2.buffer().size() == 2 * static_cast<std::size_t>(k),
               "sde-enabled buffer does not hold 2k transitions after k skill steps");
    }

    // kappa positivity over 1e4 random updates
    Rng krng(3011);
    double kappa = 0.1;
    for (int i = 0; i < 10000; ++i) {
        kappa = Ssac::kappa_update(kappa, krng.uniform(0.0, 50.0), 5.0, 3e-4);
        expect(kappa > 0.0, "kappa left the positive orthant");
    }
    expect(std::abs(Ssac::kappa_update(0.37, 5.0, 5.0, 3e-4) - 0.37) < 1e-15,
           "kappa moved at its fixed point");

    // EMA exactness
    Rng m1(3012), m2(3013);
    Mlp a(3, {4}, 2, OutputActivation::kLinear, m1);
    Mlp b(3, {4}, 2, OutputActivation::kLinear, m2);
    Mlp fixed = a;
    ema_update(fixed, a, 0.005);
    expect((fixed.flatten_params() - a.flatten_params()).norm() == 0.0,
           "EMA moved away from its fixed point");
    Mlp copy = b;
    ema_update(copy, a, 1.0);
    expect((copy.flatten_params() - a.flatten_params()).norm() == 0.0,
           "EMA with tau=1 is not an exact copy");
}

// ---- criterion 4: prior-stage convergence --------------------------------

void criterion_prior_convergence() {
    EnvSpec spec = EnvSpec::make(EnvName::kPointMaze);
    const int n_expert = g_fast ? 10 : 50;
    Rng data_rng(4001);
    Rng er = data_rng.child("expert");
    Rng gr = data_rng.child("general");
    DemoDataset expert = generate_expert(spec, n_expert, er);
    DemoDataset general = generate_general(spec, n_expert, gr);

    TrainConfig tc;  // paper-scale defaults for the skill stage
    tc.prior_steps = g_fast ? 500 : 20000;
    PriorTrainConfig cfg = tc.prior_config();
    Rng rng(4002);
    PriorTrainResult r = train_prior(expert, general, cfg, rng);

    expect(!r.log.empty(), "prior training produced no log records");
    double initial = r.log.front().l_rec;
    double final = r.log.back().l_rec;
    expect(final < 0.1 * initial,
           "final reconstruction loss " + std::to_string(final) +
               " is not below 0.1x the initial " + std::to_string(initial));

    // held-out skills from freshly generated trajectories
    Rng h(4003);
    Rng he = h.child("expert");
    Rng hg = h.child("general");
    DemoDataset ho_expert = generate_expert(spec, 10, he);
    DemoDataset ho_general = generate_general(spec, 5, hg);
    WindowPool pe = WindowPool::build(ho_expert, cfg.model.horizon);
    WindowPool pg = WindowPool::build(ho_general, cfg.model.horizon);
    double d_expert = r.disc.discriminate_batch(r.model.encode_batch(pe.windows).mean).mean();
    double d_general = r.disc.discriminate_batch(r.model.encode_batch(pg.windows).mean).mean();
    expect(d_expert > d_general,
           "held-out D(expert)=" + std::to_string(d_expert) +
               " not above D(general)=" + std::to_string(d_general));
}

// ---- criteria 5 and 6 helpers --------------------------------------------

Curve run_downstream(const SkillModel& prior, const TrainConfig& tc, const EnvSpec& spec) {
    Rng rng = Rng(tc.seed).child("train_rl");
    Rng init_rng = rng.child("init");
    Ssac agent(prior, tc.ssac_config(), spec, init_rng);
    DownstreamResult res = train_downstream(agent, spec, rng);
    Curve c;
    for (const auto& rec : res.log) {
        c.steps.push_back(static_cast<double>(rec.env_step));
        c.values.push_back(rec.mean_return);
    }
    return c;
}

// Trapezoidal area under the curve over [0, horizon_steps].
double auc(const Curve& c, double horizon_steps) {
    std::vector<double> grid;
    grid.push_back(0.0);
    for (double s : c.steps)
        if (s > 0.0 && s < horizon_steps) grid.push_back(s);
    grid.push_back(horizon_steps);
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double a = c.interpolate(grid[i]);
        double b = c.interpolate(grid[i + 1]);
        area += 0.5 * (a + b) * (grid[i + 1] - grid[i]);
    }
    return area;
}

SkillModel train_prior_for(const DemoDataset& expert, const DemoDataset& general,
                           TrainConfig tc) {
    Rng rng = Rng(tc.seed).child("train_prior");
    return train_prior(expert, general, tc.prior_config(), rng).model;
}

// ---- criterion 5: downstream acceleration --------------------------------

void criterion_downstream_acceleration() {
    EnvSpec spec = EnvSpec::make(EnvName::kPointMaze);
    TrainConfig base;
    base.n_expert = g_fast ? 10 : 50;
    base.prior_steps = g_fast ? 500 : 20000;
    base.rl_env_steps = g_fast ? 10000 : 100000;
    base.rl_eval_every = g_fast ? 2000 : 1000;
    const double early = g_fast ? 3000.0 : 30000.0;

    Rng data_rng(5001);
    Rng er = data_rng.child("expert");
    Rng gr = data_rng.child("general");
    DemoDataset expert = generate_expert(spec, base.n_expert, er);
    DemoDataset general = generate_general(spec, base.n_expert, gr);

    const std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    int auc_wins = 0, return_wins = 0;
    for (std::uint64_t seed : seeds) {
        TrainConfig full = base;
        full.seed = seed;  // sde_skill, sde_downstream, learned prior: defaults

        TrainConfig no_sde = base;
        no_sde.seed = seed;
        no_sde.sde_skill = false;
        no_sde.sde_downstream = false;

        TrainConfig no_prior = base;
        no_prior.seed = seed;
        no_prior.prior_mode = "uniform";
        no_prior.sde_skill = false;
        no_prior.sde_downstream = false;

        SkillModel prior_sde = train_prior_for(expert, general, full);
        SkillModel prior_plain = train_prior_for(expert, general, no_sde);

        Curve c_full = run_downstream(prior_sde, full, spec);
        Curve c_no_sde = run_downstream(prior_plain, no_sde, spec);
        Curve c_no_prior = run_downstream(prior_plain, no_prior, spec);

        double a_full = auc(c_full, early);
        double a_no_sde = auc(c_no_sde, early);
        double a_no_prior = auc(c_no_prior, early);
        if (a_full >= a_no_sde && a_full >= a_no_prior) ++auc_wins;
        if (c_full.values.back() >= 0.8) ++return_wins;
        std::cerr << "  [c5] seed " << seed << ": AUC full=" << a_full
                  << " no_sde=" << a_no_sde << " no_prior=" << a_no_prior
                  << " final_return=" << c_full.values.back() << "\n";
    }
    expect(auc_wins >= 4, "full pipeline beat both baselines on early AUC in only " +
                              std::to_string(auc_wins) + "/5 seeds (need >= 4)");
    expect(return_wins >= 4, "full pipeline reached mean return >= 0.8 in only " +
                                 std::to_string(return_wins) + "/5 seeds (need >= 4)");
}

// ---- criterion 6: ablation structure -------------------------------------

void criterion_ablation() {
    TrainConfig base;
    // Scaled-down budgets: the criterion constrains the table's structure and
    // the sign of the full variant's mean increase, not absolute returns.
    base.n_expert = g_fast ? 8 : 20;
    base.prior_steps = g_fast ? 300 : 5000;
    base.rl_env_steps = g_fast ? 6000 : 30000;
    base.rl_eval_every = g_fast ? 2000 : 1500;
    base.rl_eval_episodes = g_fast ? 2 : 5;

    std::vector<std::uint64_t> seeds = g_fast ? std::vector<std::uint64_t>{1, 2}
                                              : std::vector<std::uint64_t>{1, 2, 3, 4, 5};
    std::vector<std::string> envs = {"point_maze", "chained_targets"};
    fs::path work = fs::temp_directory_path() /
                    ("serla_accept_ablate_" + std::to_string(::getpid()));
    AblationTable table = run_ablation(base, seeds, envs, work);
    std::error_code ec;
    fs::remove_all(work, ec);

    expect(table.variants.size() == 4 && table.envs.size() == 2,
           "ablation table does not have 4 variants x 2 envs");
    std::size_t full_row = table.variants.size();
    for (std::size_t i = 0; i < table.variants.size(); ++i)
        if (table.variants[i].find("full") != std::string::npos) full_row = i;
    expect(full_row < table.variants.size(), "ablation table has no full-pipeline row");
    for (std::size_t ei = 0; ei < table.envs.size(); ++ei) {
        const AblationCell& cell = table.cells[full_row][ei];
        std::cerr << "  [c6] " << table.envs[ei] << ": full mean increase "
                  << 100.0 * cell.mean_increase << "% +- " << 100.0 * cell.std_increase
                  << "% (" << (cell.failed ? "partial" : "ok") << ")\n";
        expect(!cell.failed, "ablation sub-runs failed for env " + table.envs[ei]);
        expect(cell.mean_increase >= 0.0,
               "full pipeline mean increase is negative for env " + table.envs[ei]);
    }
}

// ---- criterion 7: determinism --------------------------------------------

void criterion_determinism() {
    fs::path root = fs::temp_directory_path() /
                    ("serla_accept_det_" + std::to_string(::getpid()));
    fs::create_directories(root);
    TrainConfig cfg;
    cfg.n_expert = 5;
    cfg.prior_steps = g_fast ? 100 : 500;
    cfg.rl_env_steps = g_fast ? 3000 : 8000;
    cfg.rl_eval_every = 2000;
    cfg.rl_eval_episodes = 2;
    cfg.seed = 11;

    fs::path data = root / "data";
    cmd_gen_data(cfg, data);

    fs::path p1 = root / "p1", p2 = root / "p2";
    cmd_train_prior(cfg, data, p1);
    cmd_train_prior(cfg, data, p2);
    expect(hash_file(p1 / kPriorCkptFile) == hash_file(p2 / kPriorCkptFile),
           "repeated train-prior checkpoints differ");
    expect(hash_file(p1 / kPriorLogFile) == hash_file(p2 / kPriorLogFile),
           "repeated train-prior logs differ");

    fs::path r1 = root / "r1", r2 = root / "r2";
    cmd_train_rl(cfg, p1 / kPriorCkptFile, r1);
    cmd_train_rl(cfg, p1 / kPriorCkptFile, r2);
    expect(hash_file(r1 / kPolicyCkptFile) == hash_file(r2 / kPolicyCkptFile),
           "repeated train-rl checkpoints differ");
    expect(hash_file(r1 / kRlLogFile) == hash_file(r2 / kRlLogFile),
           "repeated train-rl logs differ");

    std::error_code ec;
    fs::remove_all(root, ec);
}

// ---- criterion 8: io round trips and error classes -----------------------

void criterion_io() {
    fs::path root = fs::temp_directory_path() /
                    ("serla_accept_io_" + std::to_string(::getpid()));
    fs::create_directories(root);

    // dataset round trip, byte-for-byte on re-save
    EnvSpec spec = EnvSpec::make(EnvName::kChainedTargets);
    Rng rng(8001);
    DemoDataset ds = generate_expert(spec, 2, rng);
    fs::path d1 = root / "a.jsonl", d2 = root / "b.jsonl";
    save_dataset(ds, d1);
    save_dataset(load_dataset(d1), d2);
    expect(hash_file(d1) == hash_file(d2), "dataset save/load round trip is not bit-exact");

    // checkpoint round trip
    SkillModelConfig mcfg;
    mcfg.horizon = 4;
    mcfg.skill_dim = 3;
    mcfg.state_dim = 4;
    mcfg.action_dim = 2;
    mcfg.hidden = {8};
    Rng mrng(8002);
    SkillModel model(mcfg, mrng);
    Rng drng(8003);
    Discriminator disc(3, {8}, drng);
    fs::path c1 = root / "a.ckpt", c2 = root / "b.ckpt";
    save_prior_checkpoint(c1, model, disc, 42);
    SkillModel back;
    Discriminator dback;
    std::uint64_t hash = 0;
    load_prior_checkpoint(c1, &back, &dback, &hash);
    expect(hash == 42, "checkpoint config hash did not round trip");
    save_prior_checkpoint(c2, back, dback, hash);
    expect(hash_file(c1) == hash_file(c2), "checkpoint round trip is not bit-exact");

    // error classes
    auto threw = [](auto fn, auto tag) {
        using E = decltype(tag);
        try {
            fn();
        } catch (const E&) {
            return true;
        } catch (...) {
            return false;
        }
        return false;
    };
    expect(threw([&] { load_dataset(root / "missing.jsonl"); }, IoError{""}),
           "missing dataset did not raise the io error class");
    fs::path garbage = root / "garbage.jsonl";
    std::ofstream(garbage) << "not json\n";
    expect(threw([&] { load_dataset(garbage); }, MalformedFileError{""}),
           "garbage dataset did not raise the malformed-file error class");
    fs::path gckpt = root / "garbage.ckpt";
    std::ofstream(gckpt) << "garbage bytes, definitely not a checkpoint";
    expect(threw([&] { read_checkpoint(gckpt, nullptr); }, MalformedFileError{""}),
           "garbage checkpoint did not raise the malformed-file error class");
    {
        NamedArrays arr;
        arr.add("x", Mat::Zero(1, 1));
        fs::path vc = root / "version.ckpt";
        write_checkpoint(vc, 1, arr);
        std::fstream f(vc, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(8);
        std::uint32_t v = 99;
        f.write(reinterpret_cast<const char*>(&v), sizeof v);
        f.close();
        expect(threw([&] { read_checkpoint(vc, nullptr); }, VersionMismatchError{""}),
               "future checkpoint version did not raise the version error class");
    }

    std::error_code ec;
    fs::remove_all(root, ec);
}

struct Criterion {
    int id;
    const char* name;
    void (*fn)();
};

const Criterion kCriteria[] = {
    {1, "math oracles", criterion_math_oracles},
    {2, "gradient finite-difference suite", criterion_gradients},
    {3, "structural invariants", criterion_structure},
    {4, "prior-stage convergence", criterion_prior_convergence},
    {5, "downstream acceleration", criterion_downstream_acceleration},
    {6, "ablation structure", criterion_ablation},
    {7, "determinism", criterion_determinism},
    {8, "io round trips and error classes", criterion_io},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--fast") == 0) g_fast = true;
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (only != 0 && c.id != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        std::string why;
        bool ok = true;
        try {
            c.fn();
        } catch (const std::exception& e) {
            ok = false;
            why = e.what();
        }
        double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line << "criterion " << c.id << " (" << c.name << "): " << (ok ? "PASS" : "FAIL")
             << "  [" << secs << " s]";
        if (!ok) line << "  -- " << why;
        std::cout << line.str() << std::endl;
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
