#include "cfpt/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "cfpt/error.hpp"

namespace cfpt::csv {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) fail(ErrorKind::InvalidArgument, "cannot format number");
    return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        fail(ErrorKind::Schema, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

namespace {

/// Walks the data rows of a CSV text after checking the header.
class Reader {
public:
    Reader(std::string_view text, std::string_view file, std::vector<std::string> expected_header,
           bool header_prefix_only = false)
        : text_(text), file_(file) {
        std::string_view line;
        if (!next_line(line)) {
            fail(ErrorKind::Schema, std::string(file_) + ": missing header row");
        }
        header_ = split_line(line);
        const bool ok = header_prefix_only
                            ? header_.size() >= expected_header.size() &&
                                  std::equal(expected_header.begin(), expected_header.end(), header_.begin())
                            : header_ == expected_header;
        if (!ok) {
            fail(ErrorKind::Schema, std::string(file_) + " row 1: unexpected header '" + std::string(line) + "'");
        }
    }

    const std::vector<std::string>& header() const { return header_; }

    /// Fills `fields` with the next non-empty row; false at end of input.
    bool next(std::vector<std::string>& fields) {
        std::string_view line;
        while (next_line(line)) {
            if (line.empty() || line == "\r") continue;
            fields = split_line(line);
            if (fields.size() != header_.size()) {
                error("expected " + std::to_string(header_.size()) + " fields, found " +
                      std::to_string(fields.size()));
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::Schema, std::string(file_) + " row " + std::to_string(row_) + ": " + what);
    }

    double real(const std::string& s, const char* column) const {
        try {
            return parse_double(s);
        } catch (const Error&) {
            error(std::string("column ") + column + ": not a number '" + s + "'");
        }
    }

    int binary(const std::string& s, const char* column) const {
        if (s == "0") return 0;
        if (s == "1") return 1;
        error(std::string("column ") + column + ": expected 0 or 1, found '" + s + "'");
    }

    int integer(const std::string& s, const char* column) const {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
            error(std::string("column ") + column + ": expected an integer, found '" + s + "'");
        }
        return v;
    }

    void nonempty(const std::string& s, const char* column) const {
        if (s.empty()) error(std::string("column ") + column + " is empty");
    }

private:
    bool next_line(std::string_view& line) {
        if (pos_ >= text_.size()) return false;
        const auto nl = text_.find('\n', pos_);
        if (nl == std::string_view::npos) {
            line = text_.substr(pos_);
            pos_ = text_.size();
        } else {
            line = text_.substr(pos_, nl - pos_);
            pos_ = nl + 1;
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++row_;
        return true;
    }

    std::string_view text_;
    std::string_view file_;
    std::vector<std::string> header_;
    std::size_t pos_ = 0;
    std::size_t row_ = 0;
};

}  // namespace

std::string write_patients(const std::vector<PatientRecord>& records) {
    std::string out = "patient_id,is_cancer,diagnosis_time,scan_id,scan_time\n";
    for (const auto& r : records) {
        const std::string dx = r.diagnosis_time ? format_double(*r.diagnosis_time) : "";
        for (std::size_t i = 0; i < r.scan_times.size(); ++i) {
            out += r.patient_id + "," + (r.is_cancer ? "1" : "0") + "," + dx + "," + scan_id_for(r, i) + "," +
                   format_double(r.scan_times[i]) + "\n";
        }
    }
    return out;
}

std::vector<PatientRecord> read_patients(std::string_view text) {
    Reader reader(text, "patients.csv", {"patient_id", "is_cancer", "diagnosis_time", "scan_id", "scan_time"});
    std::vector<PatientRecord> records;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> f;
    while (reader.next(f)) {
        reader.nonempty(f[0], "patient_id");
        reader.nonempty(f[3], "scan_id");
        const bool is_cancer = reader.binary(f[1], "is_cancer") == 1;
        std::optional<double> dx;
        if (!f[2].empty()) dx = reader.real(f[2], "diagnosis_time");
        const double t = reader.real(f[4], "scan_time");

        auto [it, inserted] = index.try_emplace(f[0], records.size());
        if (inserted) {
            PatientRecord r;
            r.patient_id = f[0];
            r.is_cancer = is_cancer;
            r.diagnosis_time = dx;
            records.push_back(std::move(r));
        }
        auto& rec = records[it->second];
        if (rec.is_cancer != is_cancer || rec.diagnosis_time != dx) {
            reader.error("patient '" + f[0] + "' has inconsistent is_cancer/diagnosis_time across rows");
        }
        rec.scan_times.push_back(t);
        rec.scan_ids.push_back(f[3]);
    }
    for (const auto& r : records) {
        const auto violations = validate_record(r);
        if (!violations.empty()) {
            fail(ErrorKind::Schema, "patients.csv: patient '" + r.patient_id + "': " + violations.front());
        }
    }
    return records;
}

std::string write_scans(const std::vector<ScanFeatures>& features) {
    std::string out = "scan_id";
    const std::size_t d = features.empty() ? 0 : features.front().values.size();
    for (std::size_t j = 0; j < d; ++j) out += ",f" + std::to_string(j);
    out += "\n";
    for (const auto& s : features) {
        if (s.values.size() != d) fail(ErrorKind::Mismatch, "scans: ragged feature table");
        out += s.scan_id;
        for (double v : s.values) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

std::vector<ScanFeatures> read_scans(std::string_view text) {
    Reader reader(text, "scans.csv", {"scan_id"}, true);
    const auto& header = reader.header();
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j] != "f" + std::to_string(j - 1)) {
            fail(ErrorKind::Schema, "scans.csv row 1: feature columns must be named f0..f{d-1}");
        }
    }
    std::vector<ScanFeatures> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        reader.nonempty(f[0], "scan_id");
        ScanFeatures s;
        s.scan_id = f[0];
        for (std::size_t j = 1; j < f.size(); ++j) s.values.push_back(reader.real(f[j], header[j].c_str()));
        out.push_back(std::move(s));
    }
    return out;
}

std::string write_truth(const std::vector<OnsetTruth>& truth) {
    std::string out = "patient_id,onset_time\n";
    for (const auto& t : truth) out += t.patient_id + "," + format_double(t.onset_time) + "\n";
    return out;
}

std::vector<OnsetTruth> read_truth(std::string_view text) {
    Reader reader(text, "truth.csv", {"patient_id", "onset_time"});
    std::vector<OnsetTruth> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        reader.nonempty(f[0], "patient_id");
        out.push_back({f[0], reader.real(f[1], "onset_time"), 0.0});
    }
    return out;
}

std::string write_labels(const std::vector<ScanLabel>& labels) {
    std::string out = "scan_id,patient_id,t_d,p,y,right_censored\n";
    for (const auto& l : labels) {
        out += l.scan_id + "," + l.patient_id + "," + format_double(l.t_d) + "," + std::to_string(l.p) + "," +
               std::to_string(l.y) + "," + (l.right_censored ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<ScanLabel> read_labels(std::string_view text) {
    Reader reader(text, "labels.csv", {"scan_id", "patient_id", "t_d", "p", "y", "right_censored"});
    std::vector<ScanLabel> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        reader.nonempty(f[0], "scan_id");
        reader.nonempty(f[1], "patient_id");
        ScanLabel l;
        l.scan_id = f[0];
        l.patient_id = f[1];
        l.t_d = reader.real(f[2], "t_d");
        l.p = reader.binary(f[3], "p");
        l.y = reader.binary(f[4], "y");
        l.right_censored = reader.binary(f[5], "right_censored") == 1;
        if (l.right_censored != (l.p == 0)) reader.error("right_censored must equal 1 - p");
        if (l.p == 0 && l.y != 0) reader.error("non-cancer scan labelled malignant");
        out.push_back(std::move(l));
    }
    return out;
}

std::string write_predictions(const std::vector<PredictionRow>& rows) {
    std::string out = "scan_id,y_hat,t_pred,fold\n";
    for (const auto& r : rows) {
        out += r.prediction.scan_id + "," + format_double(r.prediction.y_hat) + "," +
               format_double(r.prediction.t_pred) + "," + std::to_string(r.fold) + "\n";
    }
    return out;
}

std::vector<PredictionRow> read_predictions(std::string_view text) {
    Reader reader(text, "predictions.csv", {"scan_id", "y_hat", "t_pred", "fold"});
    std::vector<PredictionRow> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        reader.nonempty(f[0], "scan_id");
        PredictionRow r;
        r.prediction.scan_id = f[0];
        r.prediction.y_hat = reader.real(f[1], "y_hat");
        if (!(r.prediction.y_hat >= 0.0 && r.prediction.y_hat <= 1.0)) reader.error("y_hat outside [0, 1]");
        r.prediction.t_pred = reader.real(f[2], "t_pred");
        r.fold = reader.integer(f[3], "fold");
        out.push_back(std::move(r));
    }
    return out;
}

std::string write_history(const TrainHistory& history) {
    std::string out = "epoch,lr,train_loss,val_loss,val_auc,selected\n";
    for (const auto& e : history.epochs) {
        out += std::to_string(e.epoch) + "," + format_double(e.lr) + "," + format_double(e.train_loss) + "," +
               format_double(e.val_loss) + "," + format_double(e.val_auc) + "," +
               (e.epoch == history.selected_epoch ? "1" : "0") + "\n";
    }
    return out;
}

std::string write_folds(const std::vector<FoldAssignment>& folds) {
    std::string out = "patient_id,fold,role\n";
    for (const auto& f : folds) {
        for (const auto& p : f.test) out += p + "," + std::to_string(f.fold) + ",test\n";
    }
    for (const auto& f : folds) {
        for (const auto& p : f.train) out += p + "," + std::to_string(f.fold) + ",train\n";
        for (const auto& p : f.val) out += p + "," + std::to_string(f.fold) + ",val\n";
    }
    return out;
}

std::string write_roc(const RocResult& roc) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : roc.points) {
        out += format_double(p.threshold) + "," + format_double(p.fpr) + "," + format_double(p.tpr) + "\n";
    }
    return out;
}

std::string write_km(const KMCurve& km) {
    std::string out = "time,at_risk,events,censored,survival\n";
    for (const auto& s : km.steps) {
        out += format_double(s.time) + "," + std::to_string(s.at_risk) + "," + std::to_string(s.events) + "," +
               std::to_string(s.censored) + "," + format_double(s.survival) + "\n";
    }
    return out;
}

std::string write_region_points(const std::vector<RegionPoint>& points) {
    std::string out = "t_pred,x\n";
    for (const auto& p : points) out += format_double(p.t_pred) + "," + format_double(p.x) + "\n";
    return out;
}

std::string write_threshold_table(const std::vector<ThresholdRow>& rows) {
    std::string out =
        "threshold,recall,noncancer_beyond,cancer_r1,cancer_r2,cancer_r3,cancer_r4,"
        "noncancer_r1,noncancer_r2,noncancer_r3,noncancer_r4\n";
    for (const auto& r : rows) {
        out += format_double(r.threshold) + "," + format_double(r.recall) + "," + format_double(r.noncancer_beyond);
        for (const auto* q : {&r.cancer, &r.noncancer}) {
            out += "," + format_double(q->r1) + "," + format_double(q->r2) + "," + format_double(q->r3) + "," +
                   format_double(q->r4);
        }
        out += "\n";
    }
    return out;
}

}  // namespace cfpt::csv
