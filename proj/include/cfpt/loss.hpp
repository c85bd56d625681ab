#pragma once

#include <span>
#include <string>

#include "cfpt/labels.hpp"

namespace cfpt {

/// Hyperparameters of the joint objective.
struct LossConfig {
    double lambda = 0.5;       // weight of the censored regression term
    double epsilon = 1.0;      // margin, years
    double prob_clamp = 1e-7;  // cross entropy evaluates at clamp(y_hat, c, 1 - c)

    void validate() const;
};

/// Model output for one scan.
struct Prediction {
    std::string scan_id;
    double y_hat = 0.5;   // malignancy probability
    double t_pred = 0.0;  // predicted cancer-free progression time, years

    bool operator==(const Prediction&) const = default;
};

/// Censored regression loss for one scan.
///
///   p = 0:               min(0, t_pred - t_d - eps)^2
///   p = 1, t_d >  eps:   (t_pred - t_d + eps)^2
///   p = 1, t_d <= eps:   max(0, t_pred - t_d + eps)^2
///
/// Non-cancer scans are only penalised for predicting too early; cancer scans
/// diagnosed more than eps ahead are pulled to t_d - eps, and scans at or past
/// the margin are only penalised for predicting too late. The p = 1, t_d > eps
/// branch therefore has its minimum at t_d - eps, not at t_d.
double crl(double t_pred, double t_d, int p, double epsilon);

/// d crl / d t_pred. The loss is C1, so the kink points have derivative 0.
double crl_grad(double t_pred, double t_d, int p, double epsilon);

/// Binary cross entropy on a clamped probability.
double cel(double y_hat, int y, double prob_clamp);

double sigmoid(double logit);

/// d cel(sigmoid(logit), y) / d logit = sigmoid(logit) - y.
double cel_grad_logit(double logit, int y);

/// lambda * crl + cel for one scan.
double joint_loss(const Prediction& pred, const ScanLabel& label, const LossConfig& cfg);

/// Mean joint loss. Predictions and labels must line up by scan_id.
double batch_loss(std::span<const Prediction> preds, std::span<const ScanLabel> labels,
                  const LossConfig& cfg);

}  // namespace cfpt
