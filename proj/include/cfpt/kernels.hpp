#pragma once

#include <span>
#include <vector>

#include "cfpt/network.hpp"

namespace cfpt {

struct BatchGradient {
    std::vector<double> grad;  // d(mean batch loss)/d(params)
    double loss = 0.0;         // mean joint loss
};

// Batch kernels come in two flavours. `serial` is the straightforward
// reference kept for testing; `parallel` splits the batch into fixed-size
// blocks reduced in block order, so its result does not depend on the thread
// count. The two agree to rounding, not bitwise.

namespace serial {

BatchGradient backward(const Network& net, std::span<const LabeledScan> data,
                       std::span<const std::size_t> rows, const LossConfig& cfg);

std::vector<Prediction> predict(const Network& net, std::span<const LabeledScan> data);

}  // namespace serial

namespace parallel {

inline constexpr std::size_t kReductionBlock = 8;

BatchGradient backward(const Network& net, std::span<const LabeledScan> data,
                       std::span<const std::size_t> rows, const LossConfig& cfg);

std::vector<Prediction> predict(const Network& net, std::span<const LabeledScan> data);

}  // namespace parallel

/// Exact gradient of batch_loss over `data[rows]`; uses the parallel kernel.
BatchGradient backward(const Network& net, std::span<const LabeledScan> data,
                       std::span<const std::size_t> rows, const LossConfig& cfg);

/// Gradient over every row of `data`.
BatchGradient backward(const Network& net, std::span<const LabeledScan> data, const LossConfig& cfg);

/// Order-preserving per-scan forward pass; uses the parallel kernel.
std::vector<Prediction> predict(const Network& net, std::span<const LabeledScan> data);

}  // namespace cfpt
