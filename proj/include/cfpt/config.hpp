#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "cfpt/eval.hpp"
#include "cfpt/network.hpp"
#include "cfpt/synth.hpp"
#include "cfpt/train.hpp"

namespace cfpt {

enum class Mode { SingleTask, MultiTask };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view s);

/// Everything one experiment needs. Defaults follow the published training
/// setup where one exists (epochs, decay schedule, weight decay, lambda,
/// epsilon, five folds, thresholds 1..5).
struct ExperimentConfig {
    std::filesystem::path data_dir = ".";
    std::filesystem::path out_dir = ".";
    CohortConfig cohort;
    ModelConfig model;
    TrainConfig train;
    EvalOptions eval;
    int k = 5;
    double train_val_ratio = 3.0;
    Mode mode = Mode::MultiTask;

    /// Single-task forces lambda to 0; multi-task requires lambda > 0.
    void apply_mode(Mode m);
    void validate() const;
};

/// Parses `key = value` lines with dotted keys (e.g. `train.lr0 = 1e-3`).
/// `#` starts a comment. Unknown or repeated keys are rejected. Lists are
/// comma separated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` dump of every setting (paths excluded).
std::string canonical_config(const ExperimentConfig& cfg);

/// FNV-1a over the canonical dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace cfpt
