#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cfpt/eval.hpp"
#include "cfpt/labels.hpp"
#include "cfpt/loss.hpp"
#include "cfpt/network.hpp"
#include "cfpt/synth.hpp"
#include "cfpt/train.hpp"

// Flat CSV files: UTF-8, one header row, comma separated, no quoting, '.' as
// decimal separator. Reals are written in shortest round-trip form so that
// parse(write(x)) == x.

namespace cfpt::csv {

std::string format_double(double v);
double parse_double(std::string_view s);

/// Splits one line on commas; a trailing '\r' is dropped.
std::vector<std::string> split_line(std::string_view line);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// patients.csv: patient_id,is_cancer,diagnosis_time,scan_id,scan_time
// One row per scan; patient fields repeat; diagnosis_time blank when absent.
std::string write_patients(const std::vector<PatientRecord>& records);
std::vector<PatientRecord> read_patients(std::string_view text);

// scans.csv: scan_id,f0,...,f{d-1}
std::string write_scans(const std::vector<ScanFeatures>& features);
std::vector<ScanFeatures> read_scans(std::string_view text);

// truth.csv: patient_id,onset_time
std::string write_truth(const std::vector<OnsetTruth>& truth);
std::vector<OnsetTruth> read_truth(std::string_view text);

// labels.csv: scan_id,patient_id,t_d,p,y,right_censored
std::string write_labels(const std::vector<ScanLabel>& labels);
std::vector<ScanLabel> read_labels(std::string_view text);

// predictions.csv: scan_id,y_hat,t_pred,fold
struct PredictionRow {
    Prediction prediction;
    int fold = -1;
    bool operator==(const PredictionRow&) const = default;
};
std::string write_predictions(const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions(std::string_view text);

// history_fold<k>.csv: epoch,lr,train_loss,val_loss,val_auc,selected
std::string write_history(const TrainHistory& history);

// folds.csv: patient_id,fold
std::string write_folds(const std::vector<FoldAssignment>& folds);

// roc.csv: threshold,fpr,tpr
std::string write_roc(const RocResult& roc);

// km.csv: time,at_risk,events,censored,survival
std::string write_km(const KMCurve& km);

// regions_*.csv: t_pred,x
std::string write_region_points(const std::vector<RegionPoint>& points);

// thresholds.csv: threshold,recall,noncancer_beyond,cancer_r1..r4,noncancer_r1..r4
std::string write_threshold_table(const std::vector<ThresholdRow>& rows);

}  // namespace cfpt::csv
