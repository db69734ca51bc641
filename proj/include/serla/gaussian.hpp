#pragma once

#include "serla/rng.hpp"
#include "serla/types.hpp"

namespace serla {

// log-std bounds applied at every distribution head.
inline constexpr double kLogStdMin = -10.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian given by mean and log standard deviation per dimension.
struct DiagGaussian {
    Vec mean;
    Vec log_std;

    int dim() const { return static_cast<int>(mean.size()); }

    static DiagGaussian standard(int dim) {
        return {Vec::Zero(dim), Vec::Zero(dim)};
    }
};

// KL(p || q) for diagonal Gaussians, closed form, summed over dimensions.
inline double kl_diag_gaussian(const DiagGaussian& p, const DiagGaussian& q) {
    require(p.mean.size() == p.log_std.size() && q.mean.size() == q.log_std.size(),
            "kl_diag_gaussian: mean/log_std length mismatch");
    require(p.mean.size() == q.mean.size(), "kl_diag_gaussian: dimension mismatch");
    double kl = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
        const double var_p = std::exp(2.0 * p.log_std[i]);
        const double var_q = std::exp(2.0 * q.log_std[i]);
        const double dmu = p.mean[i] - q.mean[i];
        kl += q.log_std[i] - p.log_std[i] + (var_p + dmu * dmu) / (2.0 * var_q) - 0.5;
    }
    return kl;
}

// mean + exp(log_std) * noise; linear in noise for fixed parameters.
inline Vec reparam_sample(const DiagGaussian& g, const Vec& noise) {
    require(noise.size() == g.mean.size(), "reparam_sample: noise dimension mismatch");
    return g.mean.array() + g.log_std.array().exp() * noise.array();
}

inline Vec reparam_sample(const DiagGaussian& g, Rng& rng) {
    Vec noise(g.dim());
    for (int i = 0; i < g.dim(); ++i) noise[i] = rng.normal();
    return reparam_sample(g, noise);
}

// Batched form: one distribution per column.
struct DiagGaussianBatch {
    Mat mean;     // dim x batch
    Mat log_std;  // dim x batch

    int dim() const { return static_cast<int>(mean.rows()); }
    int batch() const { return static_cast<int>(mean.cols()); }

    DiagGaussian col(int j) const { return {mean.col(j), log_std.col(j)}; }
};

// Per-column KL(p || q), returned as a 1 x batch row of scalars.
inline Vec kl_diag_gaussian_batch(const DiagGaussianBatch& p, const DiagGaussianBatch& q) {
    require(p.dim() == q.dim() && p.batch() == q.batch(),
            "kl_diag_gaussian_batch: shape mismatch");
    Mat var_p = (2.0 * p.log_std).array().exp();
    Mat var_q = (2.0 * q.log_std).array().exp();
    Mat dmu = p.mean - q.mean;
    Mat per_dim = (q.log_std - p.log_std).array()
                + (var_p.array() + dmu.array().square()) / (2.0 * var_q.array()) - 0.5;
    return per_dim.colwise().sum().transpose();
}

// Gradients of sum_j kl(p_j || q_j) scaled by per-column weights.
struct KlGrads {
    Mat d_mean_p, d_log_std_p;
    Mat d_mean_q, d_log_std_q;
};

inline KlGrads kl_diag_gaussian_batch_grads(const DiagGaussianBatch& p,
                                            const DiagGaussianBatch& q,
                                            const Vec& weight) {
    Mat var_p = (2.0 * p.log_std).array().exp();
    Mat var_q = (2.0 * q.log_std).array().exp();
    Mat dmu = p.mean - q.mean;
    KlGrads g;
    Mat w = weight.transpose().replicate(p.dim(), 1);
    g.d_mean_p = (dmu.array() / var_q.array()) * w.array();
    g.d_mean_q = -g.d_mean_p;
    g.d_log_std_p = (var_p.array() / var_q.array() - 1.0) * w.array();
    g.d_log_std_q = (1.0 - (var_p.array() + dmu.array().square()) / var_q.array()) * w.array();
    return g;
}

}  // namespace serla
