#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfpt/kernels.hpp"
#include "cfpt/loss.hpp"
#include "cfpt/network.hpp"
#include "cfpt/seed.hpp"

namespace cfpt {

struct TrainConfig {
    int max_epochs = 120;
    double lr0 = 1e-3;
    double lr_decay_factor = 0.4;
    std::vector<int> lr_decay_epochs{40, 60, 80};
    double weight_decay = 0.01;
    std::size_t batch_size = 32;
    LossConfig loss;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Step-decay schedule; epochs are numbered from 1. The learning rate of epoch
/// `e` is lr0 * factor^(number of decay epochs <= e).
double learning_rate_at(const TrainConfig& cfg, int epoch);

/// Adam with L2 weight decay folded into the gradient before the moment update.
struct AdamState {
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
    bool operator==(const AdamState&) const = default;
};

void adam_step(std::span<double> params, AdamState& state, std::span<const double> grads, double lr,
               double weight_decay);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_auc = 0.0;  // NaN when the validation set is single-class

    bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int selected_epoch = 0;  // earliest epoch of minimum validation loss
};

struct TrainResult {
    Network params;
    TrainHistory history;
};

/// Shuffled mini-batch Adam with the step-decay schedule. Returns the snapshot
/// from the epoch with the lowest validation loss. Train and validation sets
/// must not share patients.
TrainResult train(std::span<const LabeledScan> train_set, std::span<const LabeledScan> val_set,
                  const ModelConfig& mcfg, const TrainConfig& tcfg);

/// Patient-level fold assignment.
struct FoldAssignment {
    int fold = 0;
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

/// Shuffles the distinct patients, cuts them into `k` near-equal test folds,
/// and splits each fold's remainder `train_val_ratio : 1` into train and val.
std::vector<FoldAssignment> crossval_split(const std::vector<std::string>& patients, int k,
                                           std::uint64_t seed, double train_val_ratio = 3.0);

struct CrossvalResult {
    std::vector<Prediction> predictions;  // dataset order, each scan exactly once
    std::vector<int> prediction_fold;     // test fold of each prediction
    std::vector<FoldAssignment> folds;
    std::vector<TrainHistory> histories;
    std::vector<Network> models;
};

/// Trains one model per fold and pools the out-of-fold test predictions.
/// Folds run concurrently; each owns RNG streams derived from (seed, fold).
CrossvalResult run_crossval(std::span<const LabeledScan> dataset, const ModelConfig& mcfg,
                            const TrainConfig& tcfg, int k, double train_val_ratio = 3.0);

}  // namespace cfpt
