#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "cfpt/config.hpp"
#include "cfpt/eval.hpp"
#include "cfpt/synth.hpp"

// File-level experiment steps behind the `cfpt` CLI. Each writes its outputs
// into a directory and reports progress to `log`.

namespace cfpt {

struct SynthOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;  // overrides cohort.seed
};

/// Writes patients.csv, scans.csv, truth.csv.
CohortSummary cmd_synth(const SynthOptions& opts, std::ostream& log);

/// Reads a patients CSV and writes <out>/labels.csv.
std::vector<ScanLabel> cmd_label(const std::filesystem::path& patients_csv, const std::filesystem::path& out,
                                 std::ostream& log);

struct CrossvalOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> data;  // holds labels.csv and scans.csv; overrides paths.data_dir
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;  // overrides model.seed and train.seed
    std::optional<Mode> mode;
};

/// Writes predictions.csv, folds.csv, history_fold<k>.csv, model_fold<k>.snapshot
/// and the resolved configuration.
void cmd_crossval(const CrossvalOptions& opts, std::ostream& log);

struct EvalCommandOptions {
    std::filesystem::path predictions;
    std::optional<std::filesystem::path> predictions_b;
    std::filesystem::path labels;
    std::filesystem::path out;
    std::optional<std::filesystem::path> config;  // eval.* settings
    std::optional<std::vector<double>> thresholds;
    std::optional<double> operating_point;
};

/// Writes report.json, roc.csv, km.csv, thresholds.csv, regions_cancer.csv,
/// regions_noncancer.csv (and roc_b.csv with a second predictions file).
EvalReport cmd_eval(const EvalCommandOptions& opts, std::ostream& log);

/// Per-patient Kaplan-Meier curve of a labels CSV, written to <out>/km.csv.
KMCurve cmd_km(const std::filesystem::path& labels_csv, const std::filesystem::path& out, std::ostream& log);

struct LossCheckOptions {
    std::optional<double> t_pred;
    double t_d = 0.0;
    int p = 0;
    double epsilon = 1.0;
    std::size_t samples = 1000;  // random sweep size when no point is given
    std::uint64_t seed = 0;
};

/// Evaluates the censored regression loss at one point, or sweeps random points
/// comparing the analytic derivative with central differences. Returns false
/// when the sweep finds a mismatch.
bool cmd_losscheck(const LossCheckOptions& opts, std::ostream& log);

std::string report_json(const EvalReport& report, const EvalOptions& opts);

}  // namespace cfpt
