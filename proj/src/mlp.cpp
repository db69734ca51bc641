#include "serla/mlp.hpp"

#include <cmath>

namespace serla {

Mlp::Mlp(int in_dim, const std::vector<int>& hidden, int out_dim,
         OutputActivation out_act, Rng& rng)
    : out_act_(out_act), in_dim_(in_dim), out_dim_(out_dim) {
    std::vector<int> dims;
    dims.push_back(in_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out_dim);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        const int fan_in = dims[i];
        const int fan_out = dims[i + 1];
        // Xavier-uniform
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        l.w.resize(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) l.w(r, c) = rng.uniform(-bound, bound);
        l.b = Vec::Zero(fan_out);
        l.gw = Mat::Zero(fan_out, fan_in);
        l.gb = Vec::Zero(fan_out);
        layers_.push_back(std::move(l));
    }
}

Mat Mlp::forward(const Mat& x, Cache* cache) const {
    require(x.rows() == in_dim_, "Mlp::forward: input dimension mismatch");
    if (cache) {
        cache->acts.clear();
        cache->pre.clear();
        cache->acts.push_back(x);
    }
    Mat h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Mat z = (layers_[i].w * h).colwise() + layers_[i].b;
        if (cache) cache->pre.push_back(z);
        const bool last = (i + 1 == layers_.size());
        if (!last) {
            h = z.cwiseMax(0.0);  // ReLU
        } else if (out_act_ == OutputActivation::kTanh) {
            h = z.array().tanh();
        } else {
            h = std::move(z);
        }
        if (cache) cache->acts.push_back(h);
    }
    return h;
}

Vec Mlp::forward1(const Vec& x) const { return forward(Mat(x)); }

Mat Mlp::backward(const Cache& cache, const Mat& d_out, bool accumulate_params) {
    Mat delta = d_out;
    for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
        const bool last = (i + 1 == static_cast<int>(layers_.size()));
        if (last) {
            if (out_act_ == OutputActivation::kTanh) {
                // act = tanh(pre); d/dpre = 1 - act^2
                delta = delta.array() * (1.0 - cache.acts.back().array().square());
            }
        } else {
            delta = delta.array() * (cache.pre[static_cast<std::size_t>(i)].array() > 0.0).cast<double>();
        }
        if (accumulate_params) {
            layers_[static_cast<std::size_t>(i)].gw +=
                delta * cache.acts[static_cast<std::size_t>(i)].transpose();
            layers_[static_cast<std::size_t>(i)].gb += delta.rowwise().sum();
        }
        delta = layers_[static_cast<std::size_t>(i)].w.transpose() * delta;
    }
    return delta;
}

void Mlp::zero_grad() {
    for (auto& l : layers_) {
        l.gw.setZero();
        l.gb.setZero();
    }
}

bool Mlp::params_finite() const {
    for (const auto& l : layers_) {
        if (!l.w.allFinite() || !l.b.allFinite()) return false;
    }
    return true;
}

int Mlp::param_count() const {
    int n = 0;
    for (const auto& l : layers_) n += static_cast<int>(l.w.size() + l.b.size());
    return n;
}

Vec Mlp::flatten_params() const {
    Vec out(param_count());
    int k = 0;
    for (const auto& l : layers_) {
        for (int i = 0; i < l.w.size(); ++i) out[k++] = l.w.data()[i];
        for (int i = 0; i < l.b.size(); ++i) out[k++] = l.b[i];
    }
    return out;
}

void Mlp::set_params(const Vec& flat) {
    require(flat.size() == param_count(), "Mlp::set_params: size mismatch");
    int k = 0;
    for (auto& l : layers_) {
        for (int i = 0; i < l.w.size(); ++i) l.w.data()[i] = flat[k++];
        for (int i = 0; i < l.b.size(); ++i) l.b[i] = flat[k++];
    }
}

Vec Mlp::flatten_grads() const {
    Vec out(param_count());
    int k = 0;
    for (const auto& l : layers_) {
        for (int i = 0; i < l.gw.size(); ++i) out[k++] = l.gw.data()[i];
        for (int i = 0; i < l.gb.size(); ++i) out[k++] = l.gb[i];
    }
    return out;
}

void ema_update(Mlp& dst, const Mlp& src, double tau) {
    require(dst.layers().size() == src.layers().size(), "ema_update: layer count mismatch");
    for (std::size_t i = 0; i < dst.layers().size(); ++i) {
        auto& d = dst.layers()[i];
        const auto& s = src.layers()[i];
        require(d.w.rows() == s.w.rows() && d.w.cols() == s.w.cols(),
                "ema_update: shape mismatch");
        // Incremental form is exact at the fixed point (src == dst moves nothing).
        if (tau == 1.0) {
            d.w = s.w;
            d.b = s.b;
        } else {
            d.w += tau * (s.w - d.w);
            d.b += tau * (s.b - d.b);
        }
    }
}

Adam::Adam(const Mlp& model, double lr, double beta1, double beta2, double eps,
           double weight_decay)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
    for (const auto& l : model.layers()) {
        Slot s;
        s.mw = Mat::Zero(l.w.rows(), l.w.cols());
        s.vw = Mat::Zero(l.w.rows(), l.w.cols());
        s.mb = Vec::Zero(l.b.size());
        s.vb = Vec::Zero(l.b.size());
        slots_.push_back(std::move(s));
    }
}

void Adam::step(Mlp& model) {
    require(slots_.size() == model.layers().size(), "Adam bound to a different model");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        auto& l = model.layers()[i];
        auto& s = slots_[i];
        s.mw = beta1_ * s.mw + (1.0 - beta1_) * l.gw;
        s.vw = beta2_ * s.vw.array() + (1.0 - beta2_) * l.gw.array().square();
        s.mb = beta1_ * s.mb + (1.0 - beta1_) * l.gb;
        s.vb = beta2_ * s.vb.array() + (1.0 - beta2_) * l.gb.array().square();
        l.w.array() -= lr_ * (s.mw.array() / bc1) / ((s.vw.array() / bc2).sqrt() + eps_);
        l.b.array() -= lr_ * (s.mb.array() / bc1) / ((s.vb.array() / bc2).sqrt() + eps_);
        if (weight_decay_ > 0.0) {
            l.w *= 1.0 - lr_ * weight_decay_;
            l.b *= 1.0 - lr_ * weight_decay_;
        }
        l.gw.setZero();
        l.gb.setZero();
    }
}

}  // namespace serla
