#include "cfpt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "cfpt/error.hpp"

namespace cfpt {

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        fail(ErrorKind::Mismatch, "roc_auc: scores and labels differ in length");
    }
    long n_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            fail(ErrorKind::InvalidArgument, "roc_auc: labels must be 0 or 1");
        }
        if (!std::isfinite(scores[i])) {
            fail(ErrorKind::InvalidArgument, "roc_auc: non-finite score");
        }
        n_pos += labels[i];
    }
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        fail(ErrorKind::Undefined, "roc_auc: AUC undefined for single-class labels");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks (1-based) summed over positives.
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        long pos_in_tie = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            pos_in_tie += labels[order[j]];
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        pos_rank_sum += midrank * static_cast<double>(pos_in_tie);
        i = j;
    }
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);

    RocResult out;
    out.auc = u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));

    // Sweep thresholds from high to low.
    out.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    long tp = 0;
    long fp = 0;
    for (std::size_t i = order.size(); i > 0;) {
        const double s = scores[order[i - 1]];
        while (i > 0 && scores[order[i - 1]] == s) {
            if (labels[order[i - 1]] == 1) ++tp; else ++fp;
            --i;
        }
        out.points.push_back({s, static_cast<double>(fp) / static_cast<double>(n_neg),
                              static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return out;
}

double binomial_two_sided_half(long k, long n) {
    if (n < 0 || k < 0 || k > n) {
        fail(ErrorKind::InvalidArgument, "binomial test: need 0 <= k <= n");
    }
    if (n == 0) {
        return 1.0;
    }
    const long lo = std::min(k, n - k);
    const double log_half_n = static_cast<double>(n) * std::log(0.5);
    double tail = 0.0;
    for (long i = 0; i <= lo; ++i) {
        const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) -
                                  std::lgamma(static_cast<double>(i) + 1.0) -
                                  std::lgamma(static_cast<double>(n - i) + 1.0);
        tail += std::exp(log_choose + log_half_n);
    }
    return std::min(1.0, 2.0 * tail);
}

double chi2_1df_sf(double x) {
    if (x <= 0.0) {
        return 1.0;
    }
    return std::erfc(std::sqrt(0.5 * x));
}

McNemarResult mcnemar(std::span<const int> correct_a, std::span<const int> correct_b) {
    if (correct_a.size() != correct_b.size()) {
        fail(ErrorKind::Mismatch, "mcnemar: paired inputs differ in length");
    }
    if (correct_a.empty()) {
        fail(ErrorKind::InvalidArgument, "mcnemar: empty input");
    }
    McNemarResult r;
    for (std::size_t i = 0; i < correct_a.size(); ++i) {
        const int a = correct_a[i];
        const int b = correct_b[i];
        if ((a != 0 && a != 1) || (b != 0 && b != 1)) {
            fail(ErrorKind::InvalidArgument, "mcnemar: correctness indicators must be 0 or 1");
        }
        if (a == 1 && b == 0) ++r.b;
        if (a == 0 && b == 1) ++r.c;
    }
    const long discordant = r.b + r.c;
    if (discordant == 0) {
        r.undefined = true;
        r.p_value = 1.0;
        return r;
    }
    const double diff = std::abs(static_cast<double>(r.b - r.c)) - 1.0;
    r.statistic = diff * diff / static_cast<double>(discordant);
    if (discordant < kMcNemarExactBelow) {
        r.exact = true;
        r.p_value = binomial_two_sided_half(r.b, discordant);
    } else {
        r.p_value = chi2_1df_sf(r.statistic);
    }
    return r;
}

double KMCurve::survival_at(double t) const {
    double s = 1.0;
    for (const auto& step : steps) {
        if (step.time > t) break;
        s = step.survival;
    }
    return s;
}

KMCurve km_estimate(std::span<const double> times, std::span<const int> events) {
    if (times.size() != events.size()) {
        fail(ErrorKind::Mismatch, "km_estimate: times and events differ in length");
    }
    if (times.empty()) {
        fail(ErrorKind::InvalidArgument, "km_estimate: empty input");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0) {
            fail(ErrorKind::InvalidArgument, "km_estimate: times must be finite and non-negative");
        }
        if (events[i] != 0 && events[i] != 1) {
            fail(ErrorKind::InvalidArgument, "km_estimate: events must be 0 or 1");
        }
    }
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

    KMCurve curve;
    long at_risk = static_cast<long>(times.size());
    double s = 1.0;
    for (std::size_t i = 0; i < order.size();) {
        const double t = times[order[i]];
        long d = 0;
        long c = 0;
        for (; i < order.size() && times[order[i]] == t; ++i) {
            if (events[order[i]] == 1) ++d; else ++c;
        }
        if (d > 0) {
            s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
            curve.steps.push_back({t, at_risk, d, c, s});
        }
        at_risk -= d + c;
    }
    return curve;
}

namespace {

struct QuadrantCounts {
    long n1 = 0, n2 = 0, n3 = 0, n4 = 0;
    long total() const { return n1 + n2 + n3 + n4; }
};

QuadrantCounts count_quadrants(std::span<const RegionPoint> points, double threshold) {
    QuadrantCounts q;
    for (const auto& pt : points) {
        const bool p_high = pt.t_pred > threshold;
        const bool x_high = pt.x > threshold;
        if (p_high && x_high) ++q.n1;
        else if (!p_high && x_high) ++q.n2;
        else if (!p_high) ++q.n3;
        else ++q.n4;
    }
    return q;
}

RegionRatios to_ratios(const QuadrantCounts& q, double threshold) {
    const double n = static_cast<double>(q.total());
    return {threshold, q.n1 / n, q.n2 / n, q.n3 / n, q.n4 / n};
}

}  // namespace

RegionRatios region_ratios(std::span<const RegionPoint> points, double threshold) {
    if (points.empty()) {
        fail(ErrorKind::InvalidArgument, "region_ratios: empty point set");
    }
    return to_ratios(count_quadrants(points, threshold), threshold);
}

std::vector<ThresholdRow> threshold_table(std::span<const RegionPoint> cancer_points,
                                          std::span<const RegionPoint> noncancer_points,
                                          std::span<const double> thresholds) {
    if (cancer_points.empty() || noncancer_points.empty()) {
        fail(ErrorKind::InvalidArgument, "threshold_table: need both cancer and non-cancer points");
    }
    std::vector<ThresholdRow> rows;
    for (double t : thresholds) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            fail(ErrorKind::InvalidArgument, "threshold_table: thresholds must be positive");
        }
        const auto qc = count_quadrants(cancer_points, t);
        const auto qn = count_quadrants(noncancer_points, t);
        ThresholdRow row;
        row.threshold = t;
        row.cancer = to_ratios(qc, t);
        row.noncancer = to_ratios(qn, t);
        row.recall = row.cancer.r3;
        // Counted jointly so it equals the fraction of points with t_pred > T exactly.
        row.noncancer_beyond = static_cast<double>(qn.n1 + qn.n4) / static_cast<double>(qn.total());
        rows.push_back(row);
    }
    return rows;
}

double region_x(const ScanLabel& label) {
    return label.p == 1 ? label.t_d : label.t_d - 1.0;
}

PatientTimes patient_event_times(std::span<const ScanLabel> labels) {
    // Ordered map keeps the output independent of label order.
    std::map<std::string, std::pair<double, int>> per_patient;
    for (const auto& l : labels) {
        auto [it, inserted] = per_patient.try_emplace(l.patient_id, l.t_d, l.p);
        if (!inserted) {
            it->second.first = std::max(it->second.first, l.t_d);
        }
    }
    PatientTimes out;
    for (const auto& [id, tp] : per_patient) {
        out.times.push_back(std::max(0.0, tp.first));
        out.events.push_back(tp.second);
    }
    return out;
}

namespace {

std::vector<const Prediction*> join_by_scan(std::span<const Prediction> preds,
                                            std::span<const ScanLabel> labels_sorted,
                                            const char* which) {
    std::unordered_map<std::string, const Prediction*> by_id;
    std::vector<std::string> duplicates;
    for (const auto& p : preds) {
        if (!by_id.emplace(p.scan_id, &p).second) duplicates.push_back(p.scan_id);
    }
    auto list = [](const std::vector<std::string>& ids) {
        std::string s;
        for (std::size_t i = 0; i < ids.size() && i < 10; ++i) {
            if (i > 0) s += ",";
            s += ids[i];
        }
        if (ids.size() > 10) s += ",... (" + std::to_string(ids.size()) + " total)";
        return s;
    };
    if (!duplicates.empty()) {
        fail(ErrorKind::Mismatch, std::string(which) + ": duplicated scan ids: " + list(duplicates));
    }
    std::vector<const Prediction*> joined;
    std::vector<std::string> missing;
    for (const auto& l : labels_sorted) {
        auto it = by_id.find(l.scan_id);
        if (it == by_id.end()) {
            missing.push_back(l.scan_id);
        } else {
            joined.push_back(it->second);
            by_id.erase(it);
        }
    }
    if (!missing.empty()) {
        fail(ErrorKind::Mismatch, std::string(which) + ": missing predictions for scans: " + list(missing));
    }
    if (!by_id.empty()) {
        std::vector<std::string> extra;
        for (const auto& [id, p] : by_id) extra.push_back(id);
        std::sort(extra.begin(), extra.end());
        fail(ErrorKind::Mismatch, std::string(which) + ": predictions for unknown scans: " + list(extra));
    }
    return joined;
}

}  // namespace

EvalReport evaluate(std::span<const Prediction> preds, std::span<const ScanLabel> labels,
                    const EvalOptions& opts, std::span<const Prediction> preds_b) {
    std::vector<ScanLabel> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const ScanLabel& a, const ScanLabel& b) { return a.scan_id < b.scan_id; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].scan_id == sorted[i - 1].scan_id) {
            fail(ErrorKind::Mismatch, "evaluate: duplicated label scan id " + sorted[i].scan_id);
        }
    }
    const auto joined = join_by_scan(preds, sorted, "predictions");

    EvalReport report;
    report.n_scans = sorted.size();
    std::vector<double> scores;
    std::vector<int> y;
    double sum_c = 0.0, sum_n = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        scores.push_back(joined[i]->y_hat);
        y.push_back(sorted[i].y);
        report.n_malignant += static_cast<std::size_t>(sorted[i].y);
        RegionPoint pt{joined[i]->t_pred, region_x(sorted[i])};
        if (sorted[i].p == 1) {
            report.cancer_points.push_back(pt);
            sum_c += pt.t_pred;
        } else {
            report.noncancer_points.push_back(pt);
            sum_n += pt.t_pred;
        }
    }
    report.roc = roc_auc(scores, y);
    report.thresholds = threshold_table(report.cancer_points, report.noncancer_points, opts.thresholds);
    report.mean_t_pred_cancer = sum_c / static_cast<double>(report.cancer_points.size());
    report.mean_t_pred_noncancer = sum_n / static_cast<double>(report.noncancer_points.size());
    const auto pt = patient_event_times(sorted);
    report.km = km_estimate(pt.times, pt.events);

    if (!preds_b.empty()) {
        const auto joined_b = join_by_scan(preds_b, sorted, "predictions_b");
        std::vector<double> scores_b;
        std::vector<int> correct_a, correct_b;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            scores_b.push_back(joined_b[i]->y_hat);
            const int ya = joined[i]->y_hat >= opts.operating_point ? 1 : 0;
            const int yb = joined_b[i]->y_hat >= opts.operating_point ? 1 : 0;
            correct_a.push_back(ya == sorted[i].y ? 1 : 0);
            correct_b.push_back(yb == sorted[i].y ? 1 : 0);
        }
        report.roc_b = roc_auc(scores_b, y);
        report.mcnemar = mcnemar(correct_a, correct_b);
    }
    return report;
}

}  // namespace cfpt
