#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cfpt {

/// Longitudinal screening history of one patient. Times are fractional years
/// from an arbitrary per-patient origin; only differences are ever used.
struct PatientRecord {
    std::string patient_id;
    std::vector<double> scan_times;      // strictly increasing, non-empty
    bool is_cancer = false;
    std::optional<double> diagnosis_time;  // biopsy time; cancer patients only
    /// Optional per-scan identifiers. When empty, ids are `<patient_id>_s<index>`.
    std::vector<std::string> scan_ids;

    bool operator==(const PatientRecord&) const = default;
};

/// Per-scan training target.
///   t_d            defined cancer-free progression time (years, may be negative)
///   p              1 iff the patient is finally diagnosed with cancer
///   y              scan-level malignancy
///   right_censored true iff p == 0
struct ScanLabel {
    std::string scan_id;
    std::string patient_id;
    double t_d = 0.0;
    int p = 0;
    int y = 0;
    bool right_censored = true;

    bool operator==(const ScanLabel&) const = default;
};

std::string scan_id_for(const PatientRecord& record, std::size_t index);

/// Lists every violated record invariant; empty when the record is valid.
std::vector<std::string> validate_record(const PatientRecord& record);

/// Diagnosis time if recorded, otherwise the last scan. Cancer patients only.
double effective_biopsy_time(const PatientRecord& record);

/// One label per scan, in scan order.
///
/// Non-cancer patients are right-censored one year past their last scan:
/// t_d = last_scan - scan + 1, p = y = 0.
///
/// Cancer patients with biopsy time b get t_d = b - scan and p = 1. The latest
/// scan at or before b is malignant, as is every scan after b; earlier scans
/// are negative.
std::vector<ScanLabel> derive_scan_labels(const PatientRecord& record);

std::vector<ScanLabel> derive_scan_labels(const std::vector<PatientRecord>& records);

}  // namespace cfpt
