#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cfpt/labels.hpp"

namespace cfpt {

/// Parameters of the synthetic screening cohort. The generative structure
/// (Weibull onset, annual schedule with geometric loss to follow-up, a noisy
/// time-to-onset ramp feature) is an invented stand-in for real screening data.
struct CohortConfig {
    std::size_t n_patients = 1500;
    double cancer_fraction_target = 0.26;
    std::size_t feature_dim = 8;   // baseline risk features; one progression channel is appended
    double scan_interval = 1.0;    // years
    double study_horizon = 6.0;    // years
    double dropout_prob = 0.35;    // chance of leaving after each scan
    double onset_shape = 1.5;
    double onset_scale = 10.0;     // years; calibrated in the reference config
    double risk_coeff = 0.8;
    double progression_gain = 1.5;
    double noise_sd = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const CohortConfig&) const = default;
};

/// Frozen reference cohort used by the acceptance suite (seed family 0-4).
CohortConfig reference_cohort_config(std::uint64_t seed = 0);

struct ScanFeatures {
    std::string scan_id;
    std::vector<double> values;  // feature_dim baseline values + progression channel

    bool operator==(const ScanFeatures&) const = default;
};

struct OnsetTruth {
    std::string patient_id;
    double onset_time = 0.0;
    double risk_score = 0.0;

    bool operator==(const OnsetTruth&) const = default;
};

struct Cohort {
    std::vector<PatientRecord> records;
    std::vector<ScanFeatures> features;  // one per scan, record order
    std::vector<OnsetTruth> truth;       // evaluation only
};

/// Each patient draws from its own RNG stream derived from (seed, index), so
/// a patient's history does not depend on how many patients precede it.
Cohort generate_cohort(const CohortConfig& cfg);

struct CohortSummary {
    std::size_t patients = 0;
    std::size_t scans = 0;
    std::size_t cancer_patients = 0;
    std::size_t malignant_scans = 0;
    double censoring_rate = 0.0;  // fraction of right-censored (non-cancer) patients
    double mean_scans_per_patient = 0.0;
    std::map<std::size_t, std::size_t> scans_per_patient;  // scan count -> patients

    bool operator==(const CohortSummary&) const = default;
};

CohortSummary cohort_summary(const std::vector<PatientRecord>& records);

/// Bisects onset_scale until the realised cancer fraction of `cfg` meets
/// cfg.cancer_fraction_target. The fraction decreases with the scale.
double calibrate_onset_scale(CohortConfig cfg, double lo = 1.0, double hi = 200.0, int iterations = 40);

}  // namespace cfpt
