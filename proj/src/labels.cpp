#include "cfpt/labels.hpp"

#include <cmath>

#include "cfpt/error.hpp"

namespace cfpt {

std::string scan_id_for(const PatientRecord& record, std::size_t index) {
    if (!record.scan_ids.empty()) {
        return record.scan_ids.at(index);
    }
    return record.patient_id + "_s" + std::to_string(index);
}

std::vector<std::string> validate_record(const PatientRecord& record) {
    std::vector<std::string> violations;
    if (record.patient_id.empty()) {
        violations.emplace_back("patient_id is empty");
    }
    if (record.scan_times.empty()) {
        violations.emplace_back("scan_times is empty");
    }
    for (double t : record.scan_times) {
        if (!std::isfinite(t)) {
            violations.emplace_back("scan_times contains a non-finite value");
            break;
        }
    }
    for (std::size_t i = 1; i < record.scan_times.size(); ++i) {
        if (!(record.scan_times[i - 1] < record.scan_times[i])) {
            violations.emplace_back("scan_times not strictly increasing");
            break;
        }
    }
    if (record.diagnosis_time) {
        if (!record.is_cancer) {
            violations.emplace_back("diagnosis_time present for non-cancer patient");
        }
        if (!std::isfinite(*record.diagnosis_time)) {
            violations.emplace_back("diagnosis_time is not finite");
        }
    }
    if (!record.scan_ids.empty() && record.scan_ids.size() != record.scan_times.size()) {
        violations.emplace_back("scan_ids length differs from scan_times length");
    }
    return violations;
}

namespace {

void require_valid(const PatientRecord& record) {
    auto violations = validate_record(record);
    if (violations.empty()) {
        return;
    }
    std::string msg = "patient '" + record.patient_id + "': ";
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) msg += "; ";
        msg += violations[i];
    }
    fail(ErrorKind::InvalidArgument, msg);
}

}  // namespace

double effective_biopsy_time(const PatientRecord& record) {
    if (!record.is_cancer) {
        fail(ErrorKind::InvalidArgument,
             "patient '" + record.patient_id + "' has no biopsy time: not a cancer patient");
    }
    if (record.diagnosis_time) {
        return *record.diagnosis_time;
    }
    if (record.scan_times.empty()) {
        fail(ErrorKind::InvalidArgument, "patient '" + record.patient_id + "' has no scans");
    }
    return record.scan_times.back();
}

std::vector<ScanLabel> derive_scan_labels(const PatientRecord& record) {
    require_valid(record);
    const auto& times = record.scan_times;
    std::vector<ScanLabel> labels;
    labels.reserve(times.size());

    if (!record.is_cancer) {
        // (last - t) + 1 rather than (last + 1) - t keeps the last scan at exactly one year.
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double t_d = (times.back() - times[i]) + 1.0;
            labels.push_back({scan_id_for(record, i), record.patient_id, t_d, 0, 0, true});
        }
        return labels;
    }

    const double biopsy = effective_biopsy_time(record);
    // Index of the latest scan not later than the biopsy, if any.
    std::optional<std::size_t> last_before;
    for (std::size_t i = 0; i < times.size() && times[i] <= biopsy; ++i) {
        last_before = i;
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        const bool malignant = times[i] > biopsy || (last_before && *last_before == i);
        labels.push_back({scan_id_for(record, i), record.patient_id, biopsy - times[i], 1,
                          malignant ? 1 : 0, false});
    }
    return labels;
}

std::vector<ScanLabel> derive_scan_labels(const std::vector<PatientRecord>& records) {
    std::vector<ScanLabel> all;
    for (const auto& r : records) {
        auto labels = derive_scan_labels(r);
        all.insert(all.end(), std::make_move_iterator(labels.begin()),
                   std::make_move_iterator(labels.end()));
    }
    return all;
}

}  // namespace cfpt
