#include "cfpt/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "cfpt/error.hpp"
#include "cfpt/eval.hpp"

namespace cfpt {

void TrainConfig::validate() const {
    if (max_epochs < 1) fail(ErrorKind::Config, "train.max_epochs must be >= 1");
    if (!(lr0 > 0.0)) fail(ErrorKind::Config, "train.lr0 must be positive");
    if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) {
        fail(ErrorKind::Config, "train.lr_decay_factor must lie in (0, 1)");
    }
    if (!(weight_decay >= 0.0)) fail(ErrorKind::Config, "train.weight_decay must be >= 0");
    if (batch_size < 1) fail(ErrorKind::Config, "train.batch_size must be >= 1");
    loss.validate();
}

double learning_rate_at(const TrainConfig& cfg, int epoch) {
    double lr = cfg.lr0;
    for (int d : cfg.lr_decay_epochs) {
        if (d <= epoch) lr *= cfg.lr_decay_factor;
    }
    return lr;
}

void adam_step(std::span<double> params, AdamState& state, std::span<const double> grads, double lr,
               double weight_decay) {
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        fail(ErrorKind::Mismatch, "adam_step: parameter, gradient, and state shapes differ");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(AdamState::kBeta1, t);
    const double bc2 = 1.0 - std::pow(AdamState::kBeta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i] + weight_decay * params[i];
        state.m[i] = AdamState::kBeta1 * state.m[i] + (1.0 - AdamState::kBeta1) * g;
        state.v[i] = AdamState::kBeta2 * state.v[i] + (1.0 - AdamState::kBeta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEps);
    }
}

namespace {

double validation_auc(std::span<const Prediction> preds, std::span<const LabeledScan> val) {
    std::vector<double> scores;
    std::vector<int> y;
    int positives = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        scores.push_back(preds[i].y_hat);
        y.push_back(val[i].label.y);
        positives += val[i].label.y;
    }
    if (positives == 0 || positives == static_cast<int>(y.size())) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return roc_auc(scores, y).auc;
}

}  // namespace

TrainResult train(std::span<const LabeledScan> train_set, std::span<const LabeledScan> val_set,
                  const ModelConfig& mcfg, const TrainConfig& tcfg) {
    tcfg.validate();
    if (train_set.empty() || val_set.empty()) {
        fail(ErrorKind::InvalidArgument, "train: training and validation sets must be non-empty");
    }
    std::unordered_set<std::string> train_patients;
    for (const auto& s : train_set) train_patients.insert(s.label.patient_id);
    for (const auto& s : val_set) {
        if (train_patients.contains(s.label.patient_id)) {
            fail(ErrorKind::InvalidArgument,
                 "train: patient '" + s.label.patient_id + "' appears in both training and validation sets");
        }
    }

    double mean_td = 0.0;
    for (const auto& s : train_set) mean_td += s.label.t_d;
    mean_td /= static_cast<double>(train_set.size());

    Network net = init_params(mcfg, mean_td);
    AdamState adam(net.num_params());
    std::mt19937_64 rng(tcfg.seed);

    TrainResult result{net, {}};
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        const double lr = learning_rate_at(tcfg, epoch);
        std::shuffle(order.begin(), order.end(), rng);
        double train_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += tcfg.batch_size) {
            const std::size_t end = std::min(order.size(), begin + tcfg.batch_size);
            std::span<const std::size_t> rows(order.data() + begin, end - begin);
            const auto g = backward(net, train_set, rows, tcfg.loss);
            train_loss += g.loss * static_cast<double>(rows.size());
            adam_step(net.params(), adam, g.grad, lr, tcfg.weight_decay);
        }
        train_loss /= static_cast<double>(order.size());

        const auto val_preds = predict(net, val_set);
        std::vector<ScanLabel> val_labels;
        val_labels.reserve(val_set.size());
        for (const auto& s : val_set) val_labels.push_back(s.label);
        const double val_loss = batch_loss(val_preds, val_labels, tcfg.loss);

        result.history.epochs.push_back({epoch, lr, train_loss, val_loss, validation_auc(val_preds, val_set)});
        if (val_loss < best_val) {
            best_val = val_loss;
            result.history.selected_epoch = epoch;
            result.params = net;
        }
    }
    if (result.history.selected_epoch == 0) {
        // Validation loss was never finite; fall back to the last epoch.
        result.history.selected_epoch = tcfg.max_epochs;
        result.params = net;
    }
    return result;
}

std::vector<FoldAssignment> crossval_split(const std::vector<std::string>& patients, int k,
                                           std::uint64_t seed, double train_val_ratio) {
    if (k < 2) fail(ErrorKind::InvalidArgument, "crossval_split: k must be >= 2");
    if (!(train_val_ratio > 0.0)) fail(ErrorKind::InvalidArgument, "crossval_split: ratio must be positive");

    // Distinct patients, first-appearance order.
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& p : patients) {
        if (seen.insert(p).second) ids.push_back(p);
    }
    const std::size_t n = ids.size();
    if (n < static_cast<std::size_t>(k)) {
        fail(ErrorKind::InvalidArgument, "crossval_split: " + std::to_string(n) + " patients for k = " +
                                             std::to_string(k) + " folds");
    }
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);

    std::vector<std::size_t> bounds(k + 1);
    for (int f = 0; f <= k; ++f) bounds[f] = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(k);

    std::vector<FoldAssignment> folds;
    for (int f = 0; f < k; ++f) {
        FoldAssignment fa;
        fa.fold = f;
        std::vector<std::string> rest;
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= bounds[f] && i < bounds[f + 1]) fa.test.push_back(ids[i]);
            else rest.push_back(ids[i]);
        }
        if (rest.size() < 2) {
            fail(ErrorKind::InvalidArgument, "crossval_split: too few patients for a train/validation split");
        }
        auto n_train = static_cast<std::size_t>(
            std::llround(static_cast<double>(rest.size()) * train_val_ratio / (train_val_ratio + 1.0)));
        n_train = std::clamp<std::size_t>(n_train, 1, rest.size() - 1);
        fa.train.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_train));
        fa.val.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_train), rest.end());
        folds.push_back(std::move(fa));
    }
    return folds;
}

CrossvalResult run_crossval(std::span<const LabeledScan> dataset, const ModelConfig& mcfg,
                            const TrainConfig& tcfg, int k, double train_val_ratio) {
    tcfg.validate();
    if (dataset.empty()) fail(ErrorKind::InvalidArgument, "run_crossval: empty dataset");

    std::vector<std::string> patients;
    for (const auto& s : dataset) patients.push_back(s.label.patient_id);

    CrossvalResult out;
    out.folds = crossval_split(patients, k, tcfg.seed, train_val_ratio);

    // role of each patient per fold: 0 train, 1 val, 2 test
    std::vector<std::unordered_map<std::string, int>> roles(k);
    for (int f = 0; f < k; ++f) {
        for (const auto& p : out.folds[f].train) roles[f][p] = 0;
        for (const auto& p : out.folds[f].val) roles[f][p] = 1;
        for (const auto& p : out.folds[f].test) roles[f][p] = 2;
    }

    std::vector<std::vector<Prediction>> fold_preds(k);
    std::vector<std::vector<std::size_t>> fold_rows(k);
    std::vector<std::optional<TrainResult>> fold_results(k);
    std::exception_ptr error;

#pragma omp parallel for schedule(dynamic, 1)
    for (int f = 0; f < k; ++f) {
        try {
            std::vector<LabeledScan> tr, va, te;
            for (std::size_t i = 0; i < dataset.size(); ++i) {
                switch (roles[f].at(dataset[i].label.patient_id)) {
                case 0: tr.push_back(dataset[i]); break;
                case 1: va.push_back(dataset[i]); break;
                default:
                    te.push_back(dataset[i]);
                    fold_rows[f].push_back(i);
                }
            }
            ModelConfig m = mcfg;
            m.seed = derive_seed(mcfg.seed, static_cast<std::uint64_t>(f));
            TrainConfig t = tcfg;
            t.seed = derive_seed(tcfg.seed, static_cast<std::uint64_t>(f));
            auto res = train(tr, va, m, t);
            fold_preds[f] = predict(res.params, te);
            fold_results[f] = std::move(res);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    out.predictions.resize(dataset.size());
    out.prediction_fold.assign(dataset.size(), -1);
    for (int f = 0; f < k; ++f) {
        for (std::size_t j = 0; j < fold_rows[f].size(); ++j) {
            out.predictions[fold_rows[f][j]] = fold_preds[f][j];
            out.prediction_fold[fold_rows[f][j]] = f;
        }
        out.histories.push_back(std::move(fold_results[f]->history));
        out.models.push_back(std::move(fold_results[f]->params));
    }
    return out;
}

}  // namespace cfpt
