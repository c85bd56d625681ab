#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cfpt/labels.hpp"
#include "cfpt/loss.hpp"

namespace cfpt {

struct RocPoint {
    double threshold = 0.0;  // predict positive when score >= threshold
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    double auc = 0.5;
    std::vector<RocPoint> points;  // from (0,0) up to (1,1), one per distinct score
};

/// Rank-based AUC (normalised Mann-Whitney U, ties count one half).
/// Throws ErrorKind::Undefined when only one class is present.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

struct McNemarResult {
    long b = 0;  // only classifier A correct
    long c = 0;  // only classifier B correct
    double statistic = 0.0;  // continuity-corrected chi-square, 0 when b + c = 0
    double p_value = 1.0;
    bool exact = false;      // exact two-sided binomial path (b + c < 25)
    bool undefined = false;  // b + c = 0; p_value is 1 by convention
};

inline constexpr long kMcNemarExactBelow = 25;

McNemarResult mcnemar(std::span<const int> correct_a, std::span<const int> correct_b);

/// Two-sided exact binomial p-value for k successes of n at probability 1/2,
/// doubling the smaller tail and capping at 1.
double binomial_two_sided_half(long k, long n);

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1df_sf(double x);

struct KMStep {
    double time = 0.0;
    long at_risk = 0;
    long events = 0;
    long censored = 0;  // censorings at exactly this time
    double survival = 1.0;
};

/// Product-limit estimate; one step per distinct event time.
struct KMCurve {
    std::vector<KMStep> steps;
    /// S(t): product over event times <= t.
    double survival_at(double t) const;
};

/// Events tied with censorings at the same time are counted first.
KMCurve km_estimate(std::span<const double> times, std::span<const int> events);

struct RegionPoint {
    double t_pred = 0.0;  // predicted CFPT
    double x = 0.0;       // defined CFPT (cancer) or time to last scan (non-cancer)
};

/// Quadrant fractions at threshold T, with P = t_pred and X = x:
///   r1: P >  T, X >  T     r2: P <= T, X >  T
///   r3: P <= T, X <= T     r4: P >  T, X <= T
/// Points on the threshold fall on the <= side of both axes.
struct RegionRatios {
    double threshold = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    double r4 = 0.0;
};

RegionRatios region_ratios(std::span<const RegionPoint> points, double threshold);

/// `recall` is the region-3 fraction of all cancer-patient scans (not a
/// conditional recall). `noncancer_beyond` is r1 + r4 of the non-cancer scans,
/// i.e. the fraction predicted beyond the threshold.
struct ThresholdRow {
    double threshold = 0.0;
    double recall = 0.0;
    double noncancer_beyond = 0.0;
    RegionRatios cancer;
    RegionRatios noncancer;
};

std::vector<ThresholdRow> threshold_table(std::span<const RegionPoint> cancer_points,
                                          std::span<const RegionPoint> noncancer_points,
                                          std::span<const double> thresholds);

/// Region x-axis value of a scan: t_d for cancer patients, time to last scan
/// (t_d - 1) for right-censored patients.
double region_x(const ScanLabel& label);

/// One event time per patient, taken at the earliest scan: event = p and
/// time = the largest t_d of the patient (clamped at zero).
struct PatientTimes {
    std::vector<double> times;
    std::vector<int> events;
};
PatientTimes patient_event_times(std::span<const ScanLabel> labels);

struct EvalOptions {
    std::vector<double> thresholds{1, 2, 3, 4, 5};
    double operating_point = 0.5;  // predicted malignant when y_hat >= this
};

struct EvalReport {
    std::size_t n_scans = 0;
    std::size_t n_malignant = 0;
    RocResult roc;
    std::vector<ThresholdRow> thresholds;
    std::vector<RegionPoint> cancer_points;     // sorted by scan_id
    std::vector<RegionPoint> noncancer_points;  // sorted by scan_id
    KMCurve km;
    double mean_t_pred_cancer = 0.0;
    double mean_t_pred_noncancer = 0.0;
    std::optional<RocResult> roc_b;
    std::optional<McNemarResult> mcnemar;
};

/// Joins predictions to labels by scan_id (each scan exactly once) and builds
/// the full report. With `preds_b`, also compares the two classifiers.
EvalReport evaluate(std::span<const Prediction> preds, std::span<const ScanLabel> labels,
                    const EvalOptions& opts, std::span<const Prediction> preds_b = {});

}  // namespace cfpt
