#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cfpt/labels.hpp"
#include "cfpt/loss.hpp"

namespace cfpt {

struct ModelConfig {
    std::size_t input_dim = 1;
    std::vector<std::size_t> hidden_dims{64, 64};
    std::uint64_t seed = 0;
    /// Start the regression head's bias at the mean training t_d.
    bool init_reg_bias_mean = true;

    void validate() const;
};

/// Location of one affine layer inside the flat parameter vector. Weights are
/// row-major `out x in`, followed elsewhere by `out` biases.
struct DenseSlice {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
};

/// Two-headed rectifier MLP: a shared trunk feeding a sigmoid malignancy head
/// and an unbounded affine regression head. All parameters live in one flat
/// vector so the optimizer, snapshots, and gradient checks treat them uniformly.
class Network {
public:
    explicit Network(ModelConfig cfg);

    const ModelConfig& config() const noexcept { return cfg_; }
    std::span<const DenseSlice> trunk() const noexcept { return trunk_; }
    const DenseSlice& cls_head() const noexcept { return cls_; }
    const DenseSlice& reg_head() const noexcept { return reg_; }
    /// Width of the representation the heads read from.
    std::size_t feature_width() const noexcept { return cls_.in; }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }
    std::size_t num_params() const noexcept { return params_.size(); }

    bool operator==(const Network& other) const { return params_ == other.params_; }

private:
    ModelConfig cfg_;
    std::vector<DenseSlice> trunk_;
    DenseSlice cls_;
    DenseSlice reg_;
    std::vector<double> params_;
};

/// Seeded fan-in uniform initialisation, zero biases. When `reg_bias` is given
/// and the config enables it, the regression bias starts there.
Network init_params(const ModelConfig& cfg, std::optional<double> reg_bias = std::nullopt);

struct ForwardResult {
    double logit = 0.0;
    double y_hat = 0.5;
    double t_pred = 0.0;
};

ForwardResult forward(const Network& net, std::span<const double> features);

/// A labelled scan with its feature vector.
struct LabeledScan {
    ScanLabel label;
    std::vector<double> features;
};

/// Scratch buffers for one sample's forward/backward pass.
struct Workspace {
    std::vector<std::vector<double>> activations;  // post-rectifier, per trunk layer
    std::vector<double> delta;
    std::vector<double> delta_prev;
};

/// Adds the gradient of joint_loss for one sample (unnormalised) to `grad` and
/// returns the sample loss. The classification term differentiates through the
/// logit as sigmoid(z) - y; it matches the clamped loss wherever the clamp is
/// inactive.
double accumulate_gradient(const Network& net, const LabeledScan& sample, const LossConfig& cfg,
                           std::span<double> grad, Workspace& ws);

}  // namespace cfpt
