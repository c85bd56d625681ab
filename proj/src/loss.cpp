#include "cfpt/loss.hpp"

#include <algorithm>
#include <cmath>

#include "cfpt/error.hpp"

namespace cfpt {

void LossConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        fail(ErrorKind::InvalidArgument, "loss.epsilon must be positive");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        fail(ErrorKind::InvalidArgument, "loss.lambda must be non-negative");
    }
    if (!(prob_clamp > 0.0 && prob_clamp < 0.5)) {
        fail(ErrorKind::InvalidArgument, "loss.prob_clamp must lie in (0, 0.5)");
    }
}

namespace {

void check_crl_args(double t_pred, double t_d, int p, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        fail(ErrorKind::InvalidArgument, "crl: epsilon must be positive and finite");
    }
    if (!std::isfinite(t_pred) || !std::isfinite(t_d)) {
        fail(ErrorKind::InvalidArgument, "crl: non-finite input");
    }
    if (p != 0 && p != 1) {
        fail(ErrorKind::InvalidArgument, "crl: p must be 0 or 1");
    }
}

// Signed residual whose positive/negative part is penalised, per branch.
double crl_residual(double t_pred, double t_d, int p, double epsilon) {
    if (p == 0) {
        return std::min(0.0, t_pred - t_d - epsilon);
    }
    if (t_d > epsilon) {
        return t_pred - t_d + epsilon;
    }
    return std::max(0.0, t_pred - t_d + epsilon);
}

}  // namespace

double crl(double t_pred, double t_d, int p, double epsilon) {
    check_crl_args(t_pred, t_d, p, epsilon);
    const double r = crl_residual(t_pred, t_d, p, epsilon);
    return r * r;
}

double crl_grad(double t_pred, double t_d, int p, double epsilon) {
    check_crl_args(t_pred, t_d, p, epsilon);
    return 2.0 * crl_residual(t_pred, t_d, p, epsilon);
}

double cel(double y_hat, int y, double prob_clamp) {
    if (y != 0 && y != 1) {
        fail(ErrorKind::InvalidArgument, "cel: y must be 0 or 1");
    }
    if (!(y_hat >= 0.0 && y_hat <= 1.0)) {
        fail(ErrorKind::InvalidArgument, "cel: y_hat must lie in [0, 1]");
    }
    const double q = std::clamp(y_hat, prob_clamp, 1.0 - prob_clamp);
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double sigmoid(double logit) {
    if (logit >= 0.0) {
        return 1.0 / (1.0 + std::exp(-logit));
    }
    const double e = std::exp(logit);
    return e / (1.0 + e);
}

double cel_grad_logit(double logit, int y) {
    if (!std::isfinite(logit)) {
        fail(ErrorKind::InvalidArgument, "cel_grad_logit: non-finite logit");
    }
    if (y != 0 && y != 1) {
        fail(ErrorKind::InvalidArgument, "cel_grad_logit: y must be 0 or 1");
    }
    return sigmoid(logit) - static_cast<double>(y);
}

double joint_loss(const Prediction& pred, const ScanLabel& label, const LossConfig& cfg) {
    const double classification = cel(pred.y_hat, label.y, cfg.prob_clamp);
    if (cfg.lambda == 0.0) {
        return classification;
    }
    return cfg.lambda * crl(pred.t_pred, label.t_d, label.p, cfg.epsilon) + classification;
}

double batch_loss(std::span<const Prediction> preds, std::span<const ScanLabel> labels,
                  const LossConfig& cfg) {
    if (preds.size() != labels.size()) {
        fail(ErrorKind::Mismatch, "batch_loss: predictions and labels differ in length");
    }
    if (preds.empty()) {
        fail(ErrorKind::InvalidArgument, "batch_loss: empty batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].scan_id != labels[i].scan_id) {
            fail(ErrorKind::Mismatch, "batch_loss: scan_id mismatch at position " + std::to_string(i) +
                                          " ('" + preds[i].scan_id + "' vs '" + labels[i].scan_id + "')");
        }
        total += joint_loss(preds[i], labels[i], cfg);
    }
    return total / static_cast<double>(preds.size());
}

}  // namespace cfpt
