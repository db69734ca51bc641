#pragma once

#include "serla/demos.hpp"
#include "serla/skillmodel.hpp"

namespace serla {

struct PuConfig {
    double lambda = 0.5;  // positive class prior
    double xi = 0.0;      // relaxation slack
    double rho = 0.1;     // trade-off in the joint objective
};

// Probability clamp applied before the PU log terms.
inline constexpr double kProbClamp = 1e-6;

// Binary probabilistic discriminator over skill vectors.
class Discriminator {
public:
    Discriminator() = default;
    Discriminator(int skill_dim, const std::vector<int>& hidden, Rng& rng);

    double discriminate(const Vec& z) const;
    // One clamped probability per column of z.
    Vec discriminate_batch(const Mat& z) const;

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }

private:
    Mlp net_;
};

struct PuRiskResult {
    double value = 0.0;
    double l1 = 0.0;       // E_pos log(1 - D)
    double l0_unl = 0.0;   // E_unl log D
    double l0_pos = 0.0;   // E_pos log D
    bool clamp_active = false;
    double d_pos_mean = 0.0;
    double d_unl_mean = 0.0;
};

// lambda * L1 + max(-xi, L0(unl) - lambda * L0(pos)).
PuRiskResult pu_risk(const Discriminator& disc, const Mat& z_pos, const Mat& z_unl,
                     const PuConfig& cfg);

// Same value; additionally accumulates `scale` times the gradient into the
// discriminator parameters (when accumulate_params) and writes the per-sample
// gradients w.r.t. the skill inputs (when dz_* non-null).
PuRiskResult pu_risk_backward(Discriminator& disc, const Mat& z_pos, const Mat& z_unl,
                              const PuConfig& cfg, double scale, bool accumulate_params,
                              Mat* dz_pos, Mat* dz_unl);

struct PriorTrainConfig {
    SkillModelConfig model;
    PuConfig pu;
    std::vector<int> disc_hidden = {256, 256};
    double beta = 0.01;   // weight of L_reg
    double alpha = 0.1;   // weight of the SDE auxiliary reconstruction loss
    double eta = 0.01;    // SDE noise scale
    double lr = 1e-3;
    double disc_lr = 3e-5;
    // Without a pull toward zero the discriminator saturates its output
    // clamp over the whole latent space within a few hundred steps and stops
    // carrying any signal; decay makes its logits track the *current* expert
    // skill cloud and relax toward 1/2 elsewhere.
    double disc_weight_decay = 3.0;
    int batch = 64;
    int steps = 20000;
    int log_every = 100;
    bool sde_enabled = true;
    bool pu_enabled = true;
};

struct PriorLogRecord {
    int step;
    double l_rec, l_prior, l_reg, l_rec_sde, l_pu;
    double d_pos_mean, d_unl_mean;
};

struct JointObjectiveValue {
    double generator;      // minimized over mu, nu, psi
    double discriminator;  // minimized over zeta
    double l_rec, l_prior, l_reg, l_rec_sde, l_pu;
};

// One evaluation of the joint adversarial objective on fixed batches; when
// `accumulate` is set, generator-side gradients land in the skill model and
// discriminator-side gradients in the discriminator.
JointObjectiveValue joint_prior_objective(SkillModel& model, Discriminator& disc,
                                          const Mat& expert_windows, const Mat& expert_states,
                                          const Mat& general_windows,
                                          const PriorTrainConfig& cfg, Rng& rng,
                                          bool accumulate);

// Precomputed (state, window) pools for batch sampling.
struct WindowPool {
    Mat windows;  // (H*action_dim) x N
    Mat states;   // state_dim x N

    int size() const { return static_cast<int>(windows.cols()); }
    static WindowPool build(const DemoDataset& ds, int horizon);
};

struct PriorTrainResult {
    SkillModel model;
    Discriminator disc;
    std::vector<PriorLogRecord> log;
};

// Alternating minimization: one generator step on the joint objective, then
// one discriminator step on the PU risk, per iteration.
PriorTrainResult train_prior(const DemoDataset& expert, const DemoDataset& general,
                             const PriorTrainConfig& cfg, Rng& rng);

void write_prior_log_csv(const std::vector<PriorLogRecord>& log,
                         const std::filesystem::path& path);

}  // namespace serla
