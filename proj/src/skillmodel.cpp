#include "serla/skillmodel.hpp"

namespace serla {

DiagGaussianBatch split_gauss_head(const Mat& raw) {
    const int m = static_cast<int>(raw.rows()) / 2;
    DiagGaussianBatch g;
    g.mean = raw.topRows(m);
    g.log_std = raw.bottomRows(m).array().min(kLogStdMax).max(kLogStdMin);
    return g;
}

Mat gauss_head_backward(const Mat& raw, const Mat& d_mean, const Mat& d_log_std) {
    const int m = static_cast<int>(raw.rows()) / 2;
    Mat d_raw(raw.rows(), raw.cols());
    d_raw.topRows(m) = d_mean;
    Mat mask = ((raw.bottomRows(m).array() > kLogStdMin) &&
                (raw.bottomRows(m).array() < kLogStdMax))
                   .cast<double>();
    d_raw.bottomRows(m) = d_log_std.array() * mask.array();
    return d_raw;
}

SkillModel::SkillModel(const SkillModelConfig& cfg, Rng& rng) : cfg_(cfg) {
    require(cfg.state_dim > 0 && cfg.action_dim > 0, "SkillModel: dims unset");
    const int win = cfg.horizon * cfg.action_dim;
    Rng r_enc = rng.child("encoder");
    Rng r_dec = rng.child("decoder");
    Rng r_pri = rng.child("prior");
    encoder_ = Mlp(win, cfg.hidden, 2 * cfg.skill_dim, OutputActivation::kLinear, r_enc);
    decoder_ = Mlp(cfg.skill_dim, cfg.hidden, win, OutputActivation::kTanh, r_dec);
    prior_ = Mlp(cfg.state_dim, cfg.hidden, 2 * cfg.skill_dim, OutputActivation::kLinear, r_pri);
}

DiagGaussian SkillModel::encode(const Vec& flat_window) const {
    DiagGaussianBatch g = split_gauss_head(encoder_.forward(Mat(flat_window)));
    return g.col(0);
}

Mat SkillModel::decode(const Vec& z) const {
    Vec flat = decoder_.forward(Mat(z)).col(0);
    return Eigen::Map<const Mat>(flat.data(), cfg_.action_dim, cfg_.horizon).transpose();
}

DiagGaussian SkillModel::prior(const State& s) const {
    DiagGaussianBatch g = split_gauss_head(prior_.forward(Mat(s)));
    return g.col(0);
}

DiagGaussianBatch SkillModel::encode_batch(const Mat& windows) const {
    return split_gauss_head(encoder_.forward(windows));
}

Mat SkillModel::decode_batch(const Mat& z) const { return decoder_.forward(z); }

DiagGaussianBatch SkillModel::prior_batch(const Mat& states) const {
    return split_gauss_head(prior_.forward(states));
}

Mat SkillModel::draw_noise(int rows, int cols, Rng& rng) const {
    Mat n(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) n(i, j) = rng.normal();
    return n;
}

SkillModel::EncodedSample SkillModel::encode_sample(const Mat& windows, const Mat& noise) const {
    EncodedSample s;
    s.raw = encoder_.forward(windows, &s.cache);
    s.posterior = split_gauss_head(s.raw);
    require(noise.rows() == s.posterior.dim() && noise.cols() == s.posterior.batch(),
            "encode_sample: noise shape mismatch");
    s.noise = noise;
    s.z = s.posterior.mean.array() + s.posterior.log_std.array().exp() * noise.array();
    return s;
}

void SkillModel::backprop_skill_grad(const EncodedSample& s, const Mat& d_z) {
    Mat d_log_std = d_z.array() * s.posterior.log_std.array().exp() * s.noise.array();
    Mat d_raw = gauss_head_backward(s.raw, d_z, d_log_std);
    encoder_.backward(s.cache, d_raw);
}

namespace {

// Shared body of loss_rec and loss_rec_sde; z_shift is added to the sampled
// skill before decoding and carries no gradient.
double reconstruction_loss(SkillModel& model, const Mat& windows, const Mat& enc_noise,
                           const Mat& z_shift, bool accumulate, double weight) {
    SkillModel::EncodedSample enc = model.encode_sample(windows, enc_noise);
    Mat z = enc.z + z_shift;
    Mlp::Cache dec_cache;
    Mat rec = model.decoder().forward(z, accumulate ? &dec_cache : nullptr);
    Mat err = rec - windows;
    const double n = static_cast<double>(err.size());
    double loss = err.array().square().sum() / n;
    if (accumulate) {
        Mat d_rec = (2.0 * weight / n) * err;
        Mat d_z = model.decoder().backward(dec_cache, d_rec);
        model.backprop_skill_grad(enc, d_z);
    }
    return loss;
}

}  // namespace

double SkillModel::loss_rec(const Mat& windows, const Mat& enc_noise, bool accumulate,
                            double weight) {
    return reconstruction_loss(*this, windows, enc_noise,
                               Mat::Zero(cfg_.skill_dim, windows.cols()), accumulate, weight);
}

double SkillModel::loss_rec_sde(const Mat& windows, const Mat& enc_noise,
                                const Mat& sde_noise, double eta, bool accumulate,
                                double weight) {
    require(eta >= 0.0 && eta < 1.0, "loss_rec_sde: eta must be in [0, 1)");
    return reconstruction_loss(*this, windows, enc_noise, eta * sde_noise, accumulate, weight);
}

double SkillModel::loss_prior(const Mat& windows, const Mat& states, bool accumulate,
                              double weight) {
    DiagGaussianBatch post = encode_batch(windows);  // detached posterior
    Mlp::Cache pri_cache;
    Mat raw = prior_.forward(states, accumulate ? &pri_cache : nullptr);
    DiagGaussianBatch pri = split_gauss_head(raw);
    Vec kls = kl_diag_gaussian_batch(post, pri);
    const double b = static_cast<double>(kls.size());
    double loss = kls.sum() / b;
    if (accumulate) {
        Vec w = Vec::Constant(kls.size(), weight / b);
        KlGrads g = kl_diag_gaussian_batch_grads(post, pri, w);
        prior_.backward(pri_cache, gauss_head_backward(raw, g.d_mean_q, g.d_log_std_q));
        if (!cfg_.prior_detach) {
            Mlp::Cache enc_cache;
            Mat enc_raw = encoder_.forward(windows, &enc_cache);
            encoder_.backward(enc_cache, gauss_head_backward(enc_raw, g.d_mean_p, g.d_log_std_p));
        }
    }
    return loss;
}

double SkillModel::loss_reg(const Mat& windows, bool accumulate, double weight) {
    Mlp::Cache enc_cache;
    Mat raw = encoder_.forward(windows, accumulate ? &enc_cache : nullptr);
    DiagGaussianBatch post = split_gauss_head(raw);
    DiagGaussianBatch std_normal{Mat::Zero(post.dim(), post.batch()),
                                 Mat::Zero(post.dim(), post.batch())};
    Vec kls = kl_diag_gaussian_batch(post, std_normal);
    const double b = static_cast<double>(kls.size());
    double loss = kls.sum() / b;
    if (accumulate) {
        Vec w = Vec::Constant(kls.size(), weight / b);
        KlGrads g = kl_diag_gaussian_batch_grads(post, std_normal, w);
        encoder_.backward(enc_cache, gauss_head_backward(raw, g.d_mean_p, g.d_log_std_p));
    }
    return loss;
}

void SkillModel::zero_grad() {
    encoder_.zero_grad();
    decoder_.zero_grad();
    prior_.zero_grad();
}

Mat flatten_windows(const std::vector<SkillWindow>& windows) {
    require(!windows.empty(), "flatten_windows: empty batch");
    const int h = static_cast<int>(windows[0].actions.rows());
    const int ad = static_cast<int>(windows[0].actions.cols());
    Mat out(h * ad, static_cast<int>(windows.size()));
    for (std::size_t j = 0; j < windows.size(); ++j) {
        Mat t = windows[j].actions.transpose();  // action_dim x H, column-major flatten
        out.col(static_cast<int>(j)) = Eigen::Map<const Vec>(t.data(), t.size());
    }
    return out;
}

Mat stack_states(const std::vector<SkillWindow>& windows) {
    require(!windows.empty(), "stack_states: empty batch");
    Mat out(windows[0].start_state.size(), static_cast<int>(windows.size()));
    for (std::size_t j = 0; j < windows.size(); ++j)
        out.col(static_cast<int>(j)) = windows[j].start_state;
    return out;
}

}  // namespace serla
