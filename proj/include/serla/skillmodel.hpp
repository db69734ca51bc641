#pragma once

#include "serla/gaussian.hpp"
#include "serla/mlp.hpp"

namespace serla {

struct SkillModelConfig {
    int horizon = 10;      // H
    int skill_dim = 10;    // m
    int state_dim = 0;
    int action_dim = 0;
    std::vector<int> hidden = {128, 128};
    // Train the prior toward a detached copy of the encoder posterior.
    bool prior_detach = true;
};

// Splits a raw 2m-row head output into (mean, clamped log_std) and maps the
// gradient back, zeroing it where the clamp saturates.
DiagGaussianBatch split_gauss_head(const Mat& raw);
Mat gauss_head_backward(const Mat& raw, const Mat& d_mean, const Mat& d_log_std);

// Skill latent-variable model: encoder over flattened action windows,
// deterministic tanh decoder, and a state-conditioned skill prior.
class SkillModel {
public:
    SkillModel() = default;
    SkillModel(const SkillModelConfig& cfg, Rng& rng);

    const SkillModelConfig& config() const { return cfg_; }

    DiagGaussian encode(const Vec& flat_window) const;
    Mat decode(const Vec& z) const;  // H x action_dim, entries in (-1, 1)
    DiagGaussian prior(const State& s) const;

    DiagGaussianBatch encode_batch(const Mat& windows) const;   // (H*adim) x B
    Mat decode_batch(const Mat& z) const;                       // (H*adim) x B
    DiagGaussianBatch prior_batch(const Mat& states) const;

    // Loss terms. Each returns the (unweighted) scalar loss; when `accumulate`
    // is true, `weight` times the parameter gradients are added to the
    // networks' grad buffers. The noise matrices are the standard-normal
    // draws used by reparameterization.
    double loss_rec(const Mat& windows, const Mat& enc_noise, bool accumulate,
                    double weight = 1.0);
    double loss_rec_sde(const Mat& windows, const Mat& enc_noise, const Mat& sde_noise,
                        double eta, bool accumulate, double weight = 1.0);
    double loss_prior(const Mat& windows, const Mat& states, bool accumulate,
                      double weight = 1.0);
    double loss_reg(const Mat& windows, bool accumulate, double weight = 1.0);

    // Encoder posterior samples plus the plumbing needed to push an external
    // gradient d(loss)/dz back into the encoder (used by the PU term).
    struct EncodedSample {
        Mlp::Cache cache;
        Mat raw;       // encoder head output
        DiagGaussianBatch posterior;
        Mat z;         // m x B
        Mat noise;     // the draws that produced z
    };
    EncodedSample encode_sample(const Mat& windows, const Mat& noise) const;
    void backprop_skill_grad(const EncodedSample& s, const Mat& d_z);

    Mat draw_noise(int rows, int cols, Rng& rng) const;

    Mlp& encoder() { return encoder_; }
    Mlp& decoder() { return decoder_; }
    Mlp& prior_net() { return prior_; }
    const Mlp& encoder() const { return encoder_; }
    const Mlp& decoder() const { return decoder_; }
    const Mlp& prior_net() const { return prior_; }

    void zero_grad();

private:
    SkillModelConfig cfg_;
    Mlp encoder_;
    Mlp decoder_;
    Mlp prior_;
};

// Flattens a window batch into the (H*action_dim) x B matrix the model eats.
Mat flatten_windows(const std::vector<SkillWindow>& windows);
Mat stack_states(const std::vector<SkillWindow>& windows);

}  // namespace serla
