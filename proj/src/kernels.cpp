#include "cfpt/kernels.hpp"

#include <numeric>

#include "cfpt/error.hpp"

namespace cfpt {

namespace {

void check_rows(std::span<const LabeledScan> data, std::span<const std::size_t> rows) {
    if (rows.empty()) {
        fail(ErrorKind::InvalidArgument, "backward: empty batch");
    }
    for (auto r : rows) {
        if (r >= data.size()) {
            fail(ErrorKind::Mismatch, "backward: row index out of range");
        }
    }
}

Prediction predict_one(const Network& net, const LabeledScan& scan) {
    const auto out = forward(net, scan.features);
    return {scan.label.scan_id, out.y_hat, out.t_pred};
}

}  // namespace

namespace serial {

BatchGradient backward(const Network& net, std::span<const LabeledScan> data,
                       std::span<const std::size_t> rows, const LossConfig& cfg) {
    check_rows(data, rows);
    BatchGradient out;
    out.grad.assign(net.num_params(), 0.0);
    Workspace ws;
    for (auto r : rows) {
        out.loss += accumulate_gradient(net, data[r], cfg, out.grad, ws);
    }
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (auto& g : out.grad) g *= inv_n;
    out.loss *= inv_n;
    return out;
}

std::vector<Prediction> predict(const Network& net, std::span<const LabeledScan> data) {
    std::vector<Prediction> preds;
    preds.reserve(data.size());
    for (const auto& scan : data) {
        preds.push_back(predict_one(net, scan));
    }
    return preds;
}

}  // namespace serial

namespace parallel {

BatchGradient backward(const Network& net, std::span<const LabeledScan> data,
                       std::span<const std::size_t> rows, const LossConfig& cfg) {
    check_rows(data, rows);
    const std::size_t n = rows.size();
    const std::size_t n_params = net.num_params();
    const std::size_t n_blocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> block_grads(n_blocks * n_params, 0.0);
    std::vector<double> block_loss(n_blocks, 0.0);

    // Exceptions must not escape an OpenMP region; capture the first one.
    std::exception_ptr error;
#pragma omp parallel
    {
        Workspace ws;
#pragma omp for schedule(static)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
            try {
                std::span<double> grad(block_grads.data() + b * n_params, n_params);
                const std::size_t begin = b * kReductionBlock;
                const std::size_t end = std::min(n, begin + kReductionBlock);
                double loss = 0.0;
                for (std::size_t i = begin; i < end; ++i) {
                    loss += accumulate_gradient(net, data[rows[i]], cfg, grad, ws);
                }
                block_loss[b] = loss;
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);

    BatchGradient out;
    out.grad.assign(n_params, 0.0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double* g = block_grads.data() + b * n_params;
        for (std::size_t j = 0; j < n_params; ++j) {
            out.grad[j] += g[j];
        }
        out.loss += block_loss[b];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& g : out.grad) g *= inv_n;
    out.loss *= inv_n;
    return out;
}

std::vector<Prediction> predict(const Network& net, std::span<const LabeledScan> data) {
    std::vector<Prediction> preds(data.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
        try {
            preds[i] = predict_one(net, data[i]);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return preds;
}

}  // namespace parallel

BatchGradient backward(const Network& net, std::span<const LabeledScan> data,
                       std::span<const std::size_t> rows, const LossConfig& cfg) {
    return parallel::backward(net, data, rows, cfg);
}

BatchGradient backward(const Network& net, std::span<const LabeledScan> data, const LossConfig& cfg) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return parallel::backward(net, data, rows, cfg);
}

std::vector<Prediction> predict(const Network& net, std::span<const LabeledScan> data) {
    return parallel::predict(net, data);
}

}  // namespace cfpt
