#include "cfpt/network.hpp"

#include <cmath>
#include <random>

#include "cfpt/error.hpp"

namespace cfpt {

void ModelConfig::validate() const {
    if (input_dim < 1) {
        fail(ErrorKind::Config, "model.input_dim must be >= 1");
    }
    for (auto h : hidden_dims) {
        if (h < 1) {
            fail(ErrorKind::Config, "model.hidden_dims entries must be >= 1");
        }
    }
}

Network::Network(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::size_t offset = 0;
    auto add = [&offset](std::size_t in, std::size_t out) {
        DenseSlice s{in, out, offset, offset + in * out};
        offset += in * out + out;
        return s;
    };
    std::size_t width = cfg_.input_dim;
    for (auto h : cfg_.hidden_dims) {
        trunk_.push_back(add(width, h));
        width = h;
    }
    cls_ = add(width, 1);
    reg_ = add(width, 1);
    params_.assign(offset, 0.0);
}

Network init_params(const ModelConfig& cfg, std::optional<double> reg_bias) {
    Network net(cfg);
    std::mt19937_64 rng(cfg.seed);
    auto fill = [&](const DenseSlice& s, double limit) {
        std::uniform_real_distribution<double> dist(-limit, limit);
        auto p = net.params();
        for (std::size_t i = 0; i < s.in * s.out; ++i) {
            p[s.weight_offset + i] = dist(rng);
        }
    };
    for (const auto& layer : net.trunk()) {
        fill(layer, std::sqrt(6.0 / static_cast<double>(layer.in)));
    }
    fill(net.cls_head(), 1.0 / std::sqrt(static_cast<double>(net.cls_head().in)));
    fill(net.reg_head(), 1.0 / std::sqrt(static_cast<double>(net.reg_head().in)));
    if (reg_bias && cfg.init_reg_bias_mean) {
        net.params()[net.reg_head().bias_offset] = *reg_bias;
    }
    return net;
}

namespace {

void affine(const DenseSlice& s, std::span<const double> params, std::span<const double> in,
            std::vector<double>& out) {
    out.resize(s.out);
    const double* w = params.data() + s.weight_offset;
    const double* b = params.data() + s.bias_offset;
    for (std::size_t o = 0; o < s.out; ++o) {
        double acc = b[o];
        const double* row = w + o * s.in;
        for (std::size_t i = 0; i < s.in; ++i) {
            acc += row[i] * in[i];
        }
        out[o] = acc;
    }
}

double head(const DenseSlice& s, std::span<const double> params, std::span<const double> in) {
    const double* w = params.data() + s.weight_offset;
    double acc = params[s.bias_offset];
    for (std::size_t i = 0; i < s.in; ++i) {
        acc += w[i] * in[i];
    }
    return acc;
}

void check_dim(const Network& net, std::span<const double> features) {
    if (features.size() != net.config().input_dim) {
        fail(ErrorKind::Mismatch, "feature length " + std::to_string(features.size()) +
                                      " does not match model input_dim " +
                                      std::to_string(net.config().input_dim));
    }
}

// Runs the trunk, leaving post-rectifier activations in ws; returns the top layer.
std::span<const double> run_trunk(const Network& net, std::span<const double> features, Workspace& ws) {
    const auto trunk = net.trunk();
    ws.activations.resize(trunk.size());
    std::span<const double> current = features;
    for (std::size_t l = 0; l < trunk.size(); ++l) {
        auto& act = ws.activations[l];
        affine(trunk[l], net.params(), current, act);
        for (auto& a : act) {
            a = a > 0.0 ? a : 0.0;
        }
        current = act;
    }
    return current;
}

}  // namespace

ForwardResult forward(const Network& net, std::span<const double> features) {
    check_dim(net, features);
    Workspace ws;
    auto top = run_trunk(net, features, ws);
    ForwardResult r;
    r.logit = head(net.cls_head(), net.params(), top);
    r.y_hat = sigmoid(r.logit);
    r.t_pred = head(net.reg_head(), net.params(), top);
    return r;
}

double accumulate_gradient(const Network& net, const LabeledScan& sample, const LossConfig& cfg,
                           std::span<double> grad, Workspace& ws) {
    if (grad.size() != net.num_params()) {
        fail(ErrorKind::Mismatch, "gradient buffer size does not match parameter count");
    }
    std::span<const double> features = sample.features;
    check_dim(net, features);
    const auto params = net.params();
    const auto& label = sample.label;

    auto top = run_trunk(net, features, ws);
    const double logit = head(net.cls_head(), params, top);
    const double t_pred = head(net.reg_head(), params, top);
    const double y_hat = sigmoid(logit);

    double loss = cel(y_hat, label.y, cfg.prob_clamp);
    const double d_logit = cel_grad_logit(logit, label.y);
    double d_t = 0.0;
    if (cfg.lambda != 0.0) {
        loss += cfg.lambda * crl(t_pred, label.t_d, label.p, cfg.epsilon);
        d_t = cfg.lambda * crl_grad(t_pred, label.t_d, label.p, cfg.epsilon);
    }

    const auto& cls = net.cls_head();
    const auto& reg = net.reg_head();
    const std::size_t width = cls.in;
    ws.delta.assign(width, 0.0);
    for (std::size_t i = 0; i < width; ++i) {
        grad[cls.weight_offset + i] += d_logit * top[i];
        ws.delta[i] += d_logit * params[cls.weight_offset + i];
    }
    grad[cls.bias_offset] += d_logit;
    if (d_t != 0.0) {
        for (std::size_t i = 0; i < width; ++i) {
            grad[reg.weight_offset + i] += d_t * top[i];
            ws.delta[i] += d_t * params[reg.weight_offset + i];
        }
        grad[reg.bias_offset] += d_t;
    }

    const auto trunk = net.trunk();
    for (std::size_t l = trunk.size(); l-- > 0;) {
        const auto& layer = trunk[l];
        const auto& act = ws.activations[l];
        std::span<const double> input = l == 0 ? features : std::span<const double>(ws.activations[l - 1]);
        for (std::size_t o = 0; o < layer.out; ++o) {
            if (!(act[o] > 0.0)) {
                ws.delta[o] = 0.0;
            }
        }
        if (l > 0) {
            ws.delta_prev.assign(layer.in, 0.0);
        }
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double d = ws.delta[o];
            if (d == 0.0) continue;
            double* gw = grad.data() + layer.weight_offset + o * layer.in;
            const double* w = params.data() + layer.weight_offset + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) {
                gw[i] += d * input[i];
            }
            grad[layer.bias_offset + o] += d;
            if (l > 0) {
                for (std::size_t i = 0; i < layer.in; ++i) {
                    ws.delta_prev[i] += d * w[i];
                }
            }
        }
        if (l > 0) {
            std::swap(ws.delta, ws.delta_prev);
        }
    }
    return loss;
}

}  // namespace cfpt
