#pragma once

#include <string>
#include <vector>

#include "serla/rng.hpp"
#include "serla/types.hpp"

namespace serla {

enum class OutputActivation { kLinear, kTanh };

// Fully connected network, ReLU hidden layers, explicit backward pass.
// Batches are column-major: each column of the input matrix is one sample.
class Mlp {
public:
    struct Layer {
        Mat w;
        Vec b;
        Mat gw;  // accumulated gradients
        Vec gb;
    };

    // acts[0] is the input; acts[i] the activated output of layer i-1.
    // pre[i] holds layer i's pre-activation.
    struct Cache {
        std::vector<Mat> acts;
        std::vector<Mat> pre;
    };

    Mlp() = default;
    Mlp(int in_dim, const std::vector<int>& hidden, int out_dim,
        OutputActivation out_act, Rng& rng);

    Mat forward(const Mat& x, Cache* cache = nullptr) const;
    Vec forward1(const Vec& x) const;

    // Backpropagates d(loss)/d(output); accumulates parameter gradients and
    // returns d(loss)/d(input). When accumulate_params is false only the
    // input gradient is produced (used for detached critics).
    Mat backward(const Cache& cache, const Mat& d_out, bool accumulate_params = true);

    void zero_grad();
    bool params_finite() const;

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    OutputActivation output_activation() const { return out_act_; }

    // Flat parameter access for finite-difference checks and EMA updates.
    int param_count() const;
    Vec flatten_params() const;
    void set_params(const Vec& flat);
    Vec flatten_grads() const;

private:
    std::vector<Layer> layers_;
    OutputActivation out_act_ = OutputActivation::kLinear;
    int in_dim_ = 0;
    int out_dim_ = 0;
};

// Elementwise EMA toward src: dst <- tau * src + (1 - tau) * dst.
void ema_update(Mlp& dst, const Mlp& src, double tau);

// Adaptive-moment optimizer bound to one Mlp's layer shapes.
class Adam {
public:
    Adam() = default;
    // weight_decay is decoupled (applied to the weights directly, scaled by
    // lr), so it acts as an exponential pull toward zero independent of the
    // gradient statistics.
    explicit Adam(const Mlp& model, double lr, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0);

    // Applies the accumulated gradients of `model` and clears them.
    void step(Mlp& model);

    double lr() const { return lr_; }

private:
    struct Slot {
        Mat mw, vw;
        Vec mb, vb;
    };
    std::vector<Slot> slots_;
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8, weight_decay_ = 0.0;
    long t_ = 0;
};

}  // namespace serla
