#include "cfpt/commands.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "cfpt/csv.hpp"
#include "cfpt/error.hpp"
#include "cfpt/labels.hpp"
#include "cfpt/loss.hpp"
#include "cfpt/snapshot.hpp"
#include "cfpt/train.hpp"

namespace cfpt {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
    }
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void print_summary(const CohortSummary& s, std::ostream& log) {
    log << "patients " << s.patients << "\n"
        << "scans " << s.scans << "\n"
        << "cancer_patients " << s.cancer_patients << "\n"
        << "malignant_scans " << s.malignant_scans << "\n"
        << "censoring_rate " << fmt(s.censoring_rate) << "\n"
        << "mean_scans_per_patient " << fmt(s.mean_scans_per_patient) << "\n";
    for (const auto& [n, count] : s.scans_per_patient) {
        log << "scans_per_patient[" << n << "] " << count << "\n";
    }
}

std::vector<LabeledScan> join_features(const std::vector<ScanLabel>& labels, const std::vector<ScanFeatures>& scans) {
    std::unordered_map<std::string, const ScanFeatures*> by_id;
    for (const auto& s : scans) {
        if (!by_id.emplace(s.scan_id, &s).second) {
            fail(ErrorKind::Mismatch, "scans.csv: duplicated scan id '" + s.scan_id + "'");
        }
    }
    std::vector<LabeledScan> data;
    data.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = by_id.find(l.scan_id);
        if (it == by_id.end()) {
            fail(ErrorKind::Mismatch, "scans.csv: no features for scan '" + l.scan_id + "'");
        }
        data.push_back({l, it->second->values});
    }
    return data;
}

}  // namespace

CohortSummary cmd_synth(const SynthOptions& opts, std::ostream& log) {
    auto cfg = load_config(opts.config);
    if (opts.seed) cfg.cohort.seed = *opts.seed;
    ensure_dir(opts.out);
    const auto cohort = generate_cohort(cfg.cohort);
    csv::write_file(opts.out / "patients.csv", csv::write_patients(cohort.records));
    csv::write_file(opts.out / "scans.csv", csv::write_scans(cohort.features));
    csv::write_file(opts.out / "truth.csv", csv::write_truth(cohort.truth));
    const auto summary = cohort_summary(cohort.records);
    print_summary(summary, log);
    return summary;
}

std::vector<ScanLabel> cmd_label(const fs::path& patients_csv, const fs::path& out, std::ostream& log) {
    const auto records = csv::read_patients(csv::read_file(patients_csv));
    const auto labels = derive_scan_labels(records);
    ensure_dir(out);
    csv::write_file(out / "labels.csv", csv::write_labels(labels));
    log << "labelled " << labels.size() << " scans from " << records.size() << " patients\n";
    return labels;
}

void cmd_crossval(const CrossvalOptions& opts, std::ostream& log) {
    auto cfg = load_config(opts.config);
    if (opts.seed) {
        cfg.model.seed = *opts.seed;
        cfg.train.seed = *opts.seed;
    }
    if (opts.mode) {
        if (*opts.mode == Mode::MultiTask && cfg.train.loss.lambda == 0.0) {
            fail(ErrorKind::Config, "--mode multi_task requires loss.lambda > 0 in the config");
        }
        cfg.apply_mode(*opts.mode);
    }
    cfg.validate();
    const fs::path data_dir = opts.data ? *opts.data : cfg.data_dir;

    const auto labels = csv::read_labels(csv::read_file(data_dir / "labels.csv"));
    const auto scans = csv::read_scans(csv::read_file(data_dir / "scans.csv"));
    const auto data = join_features(labels, scans);
    if (data.empty()) fail(ErrorKind::InvalidArgument, "crossval: empty dataset");
    cfg.model.input_dim = data.front().features.size();

    log << "crossval: " << data.size() << " scans, k = " << cfg.k << ", mode = " << to_string(cfg.mode)
        << ", lambda = " << csv::format_double(cfg.train.loss.lambda) << "\n";
    const auto result = run_crossval(data, cfg.model, cfg.train, cfg.k, cfg.train_val_ratio);

    ensure_dir(opts.out);
    std::vector<csv::PredictionRow> rows;
    rows.reserve(result.predictions.size());
    for (std::size_t i = 0; i < result.predictions.size(); ++i) {
        rows.push_back({result.predictions[i], result.prediction_fold[i]});
    }
    csv::write_file(opts.out / "predictions.csv", csv::write_predictions(rows));
    csv::write_file(opts.out / "folds.csv", csv::write_folds(result.folds));
    csv::write_file(opts.out / "config.resolved.cfg", canonical_config(cfg));
    const auto hash = config_hash(cfg);
    for (std::size_t f = 0; f < result.histories.size(); ++f) {
        const auto suffix = std::to_string(f);
        csv::write_file(opts.out / ("history_fold" + suffix + ".csv"), csv::write_history(result.histories[f]));
        save_snapshot(opts.out / ("model_fold" + suffix + ".snapshot"), result.models[f], hash);
        const auto& h = result.histories[f];
        const auto& best = h.epochs.at(static_cast<std::size_t>(h.selected_epoch - 1));
        log << "fold " << f << ": selected epoch " << h.selected_epoch << ", val_loss " << fmt(best.val_loss)
            << ", val_auc " << fmt(best.val_auc) << "\n";
    }
}

std::string report_json(const EvalReport& r, const EvalOptions& opts) {
    using json = nlohmann::ordered_json;
    auto num = [](double v) -> json {
        if (std::isfinite(v)) return v;
        return nullptr;
    };
    json j;
    j["n_scans"] = r.n_scans;
    j["n_malignant"] = r.n_malignant;
    j["n_cancer_scans"] = r.cancer_points.size();
    j["n_noncancer_scans"] = r.noncancer_points.size();
    j["auc"] = r.roc.auc;
    j["operating_point"] = opts.operating_point;
    j["mean_t_pred_cancer"] = num(r.mean_t_pred_cancer);
    j["mean_t_pred_noncancer"] = num(r.mean_t_pred_noncancer);
    json rows = json::array();
    for (const auto& t : r.thresholds) {
        auto regions = [](const RegionRatios& q) {
            return json{{"r1", q.r1}, {"r2", q.r2}, {"r3", q.r3}, {"r4", q.r4}};
        };
        rows.push_back({{"threshold", t.threshold},
                        {"recall", t.recall},
                        {"noncancer_beyond", t.noncancer_beyond},
                        {"cancer_regions", regions(t.cancer)},
                        {"noncancer_regions", regions(t.noncancer)}});
    }
    j["threshold_table"] = rows;
    j["km_event_times"] = r.km.steps.size();
    j["km_final_survival"] = r.km.steps.empty() ? 1.0 : r.km.steps.back().survival;
    if (r.roc_b) j["auc_b"] = r.roc_b->auc;
    if (r.mcnemar) {
        const auto& m = *r.mcnemar;
        j["mcnemar"] = {{"b", m.b},
                        {"c", m.c},
                        {"statistic", m.statistic},
                        {"p_value", m.p_value},
                        {"exact", m.exact},
                        {"undefined", m.undefined}};
    }
    return j.dump(2) + "\n";
}

EvalReport cmd_eval(const EvalCommandOptions& opts, std::ostream& log) {
    EvalOptions eo;
    if (opts.config) eo = load_config(*opts.config).eval;
    if (opts.thresholds) eo.thresholds = *opts.thresholds;
    if (opts.operating_point) eo.operating_point = *opts.operating_point;

    auto to_preds = [](const std::vector<csv::PredictionRow>& rows) {
        std::vector<Prediction> p;
        p.reserve(rows.size());
        for (const auto& r : rows) p.push_back(r.prediction);
        return p;
    };
    const auto labels = csv::read_labels(csv::read_file(opts.labels));
    const auto preds = to_preds(csv::read_predictions(csv::read_file(opts.predictions)));
    std::vector<Prediction> preds_b;
    if (opts.predictions_b) {
        preds_b = to_preds(csv::read_predictions(csv::read_file(*opts.predictions_b)));
        if (preds_b.empty()) fail(ErrorKind::InvalidArgument, "eval: second predictions file is empty");
    }
    const auto report = evaluate(preds, labels, eo, preds_b);

    ensure_dir(opts.out);
    csv::write_file(opts.out / "report.json", report_json(report, eo));
    csv::write_file(opts.out / "roc.csv", csv::write_roc(report.roc));
    csv::write_file(opts.out / "km.csv", csv::write_km(report.km));
    csv::write_file(opts.out / "thresholds.csv", csv::write_threshold_table(report.thresholds));
    csv::write_file(opts.out / "regions_cancer.csv", csv::write_region_points(report.cancer_points));
    csv::write_file(opts.out / "regions_noncancer.csv", csv::write_region_points(report.noncancer_points));
    if (report.roc_b) csv::write_file(opts.out / "roc_b.csv", csv::write_roc(*report.roc_b));

    log << "auc " << fmt(report.roc.auc) << "\n";
    log << "threshold recall noncancer_beyond\n";
    for (const auto& t : report.thresholds) {
        log << csv::format_double(t.threshold) << " " << fmt(100.0 * t.recall, 2) << " "
            << fmt(100.0 * t.noncancer_beyond, 2) << "\n";
    }
    if (report.mcnemar) {
        const auto& m = *report.mcnemar;
        log << "auc_b " << fmt(report.roc_b->auc) << "\n"
            << "mcnemar b " << m.b << " c " << m.c << " p " << fmt(m.p_value, 6)
            << (m.exact ? " (exact)" : " (chi-square)") << (m.undefined ? " undefined" : "") << "\n";
    }
    return report;
}

KMCurve cmd_km(const fs::path& labels_csv, const fs::path& out, std::ostream& log) {
    const auto labels = csv::read_labels(csv::read_file(labels_csv));
    const auto pt = patient_event_times(labels);
    const auto km = km_estimate(pt.times, pt.events);
    ensure_dir(out);
    csv::write_file(out / "km.csv", csv::write_km(km));
    log << "patients " << pt.times.size() << ", event times " << km.steps.size() << ", final survival "
        << fmt(km.steps.empty() ? 1.0 : km.steps.back().survival) << "\n";
    return km;
}

bool cmd_losscheck(const LossCheckOptions& opts, std::ostream& log) {
    constexpr double h = 1e-5;
    auto fd = [&](double t, double td, int p, double eps) {
        return (crl(t + h, td, p, eps) - crl(t - h, td, p, eps)) / (2.0 * h);
    };
    if (opts.t_pred) {
        const double t = *opts.t_pred;
        log << "crl " << csv::format_double(crl(t, opts.t_d, opts.p, opts.epsilon)) << "\n"
            << "crl_grad " << csv::format_double(crl_grad(t, opts.t_d, opts.p, opts.epsilon)) << "\n"
            << "central_difference " << csv::format_double(fd(t, opts.t_d, opts.p, opts.epsilon)) << "\n";
        return true;
    }
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> time(-5.0, 10.0);
    std::uniform_real_distribution<double> margin(0.01, 3.0);
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < opts.samples; ++i) {
        const int p = static_cast<int>(rng() & 1U);
        const double t = time(rng), td = time(rng), eps = margin(rng);
        const double kink = p == 0 ? td + eps : td - eps;
        if (std::abs(t - kink) < 1e-3) continue;
        const double a = crl_grad(t, td, p, eps);
        const double n = fd(t, td, p, eps);
        const double err = std::abs(a - n) / std::max(1.0, std::abs(a));
        worst = std::max(worst, err);
        ++checked;
    }
    const bool ok = worst <= 1e-6;
    log << "checked " << checked << " points, max relative derivative error " << worst
        << (ok ? " ok" : " FAILED") << "\n";
    return ok;
}

}  // namespace cfpt
