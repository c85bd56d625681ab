#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cfpt/config.hpp"
#include "cfpt/csv.hpp"
#include "cfpt/error.hpp"

using namespace cfpt;

namespace {

std::string error_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Csv, DoublesRoundTrip) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> wide(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double v = wide(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
    }
    EXPECT_EQ(csv::format_double(0.5), "0.5");
    EXPECT_EQ(csv::format_double(3.0), "3");
    EXPECT_TRUE(std::isnan(csv::parse_double(csv::format_double(std::nan("")))));
    EXPECT_EQ(csv::parse_double("-inf"), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(csv::parse_double("1.0x"), Error);
    EXPECT_THROW(csv::parse_double(""), Error);
}

TEST(Csv, SplitLine) {
    EXPECT_EQ(csv::split_line("a,b,,c\r"), (std::vector<std::string>{"a", "b", "", "c"}));
    EXPECT_EQ(csv::split_line(""), (std::vector<std::string>{""}));
}

TEST(Csv, WorkedLabelExamplesRoundTrip) {
    const std::vector<PatientRecord> records{
        {"nc", {0, 1, 2}, false, std::nullopt, {}},
        {"c1", {0, 1.5}, true, 2.0, {}},
        {"c2", {0, 1, 3}, true, 2.0, {}},
        {"c3", {0, 1}, true, std::nullopt, {}},
    };
    const auto back = csv::read_patients(csv::write_patients(records));
    ASSERT_EQ(back.size(), records.size());
    EXPECT_EQ(derive_scan_labels(back), derive_scan_labels(records));

    const auto labels = derive_scan_labels(records);
    EXPECT_EQ(csv::read_labels(csv::write_labels(labels)), labels);
}

TEST(Csv, EmptyInputsWriteHeaderOnly) {
    EXPECT_EQ(csv::write_patients({}), "patient_id,is_cancer,diagnosis_time,scan_id,scan_time\n");
    EXPECT_EQ(csv::write_labels({}), "scan_id,patient_id,t_d,p,y,right_censored\n");
    EXPECT_TRUE(csv::read_patients(csv::write_patients({})).empty());
}

TEST(Csv, ScansTruthPredictionsRoundTrip) {
    const std::vector<ScanFeatures> scans{{"a", {0.1, -2.0, 1e-300}}, {"b", {3.0, 4.5, -0.0}}};
    EXPECT_EQ(csv::read_scans(csv::write_scans(scans)), scans);

    const std::vector<OnsetTruth> truth{{"p", 2.25, 0.0}, {"q", 17.5, 0.0}};
    EXPECT_EQ(csv::read_truth(csv::write_truth(truth)), truth);

    const std::vector<csv::PredictionRow> preds{{{"a", 0.125, 3.5}, 0}, {{"b", 0.9999999, -1.0}, 4}};
    EXPECT_EQ(csv::read_predictions(csv::write_predictions(preds)), preds);
}

TEST(Csv, MalformedRowsNameTheRow) {
    const std::string bad_number =
        "scan_id,patient_id,t_d,p,y,right_censored\n"
        "a,p,1,1,1,0\n"
        "b,p,oops,1,1,0\n";
    const auto msg = error_message([&] { csv::read_labels(bad_number); });
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("t_d"), std::string::npos) << msg;

    const std::string short_row =
        "scan_id,patient_id,t_d,p,y,right_censored\n"
        "a,p,1,1\n";
    EXPECT_NE(error_message([&] { csv::read_labels(short_row); }).find("row 2"), std::string::npos);

    EXPECT_THROW(csv::read_labels("wrong,header\n"), Error);
    EXPECT_THROW(csv::read_labels(""), Error);
    EXPECT_THROW(csv::read_patients("patient_id,is_cancer,diagnosis_time,scan_id,scan_time\np,0,,s0,1\np,0,,s1,0\n"),
                 Error);
    EXPECT_THROW(csv::read_patients("patient_id,is_cancer,diagnosis_time,scan_id,scan_time\np,2,,s0,1\n"), Error);
}

TEST(Csv, MissingFileIsAnIoError) {
    try {
        csv::read_file("/nonexistent/dir/file.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

TEST(Config, ParsesKeysAndComments) {
    const auto cfg = parse_config(
        "# comment\n"
        "cohort.n_patients = 40   # trailing\n"
        "model.hidden_dims = 8,4\n"
        "train.lr_decay_epochs = 2,3\n"
        "train.max_epochs = 4\n"
        "loss.lambda = 0\n"
        "mode = single_task\n"
        "eval.thresholds = 0.5, 1.5\n"
        "\n");
    EXPECT_EQ(cfg.cohort.n_patients, 40u);
    EXPECT_EQ(cfg.model.hidden_dims, (std::vector<std::size_t>{8, 4}));
    EXPECT_EQ(cfg.train.lr_decay_epochs, (std::vector<int>{2, 3}));
    EXPECT_EQ(cfg.train.max_epochs, 4);
    EXPECT_EQ(cfg.mode, Mode::SingleTask);
    EXPECT_EQ(cfg.eval.thresholds, (std::vector<double>{0.5, 1.5}));
    EXPECT_EQ(cfg.train.loss.lambda, 0.0);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse_config("nonsense.key = 1\n"), Error);
    EXPECT_THROW(parse_config("train.lr0 = 1\ntrain.lr0 = 2\n"), Error);
    EXPECT_THROW(parse_config("train.lr0\n"), Error);
    EXPECT_THROW(parse_config("train.max_epochs = many\n"), Error);
    EXPECT_THROW(parse_config("mode = multi_task\nloss.lambda = 0\n"), Error);
    // single_task overrides the configured weight.
    EXPECT_EQ(parse_config("mode = single_task\nloss.lambda = 0.5\n").train.loss.lambda, 0.0);
    EXPECT_THROW(parse_config("crossval.k = 1\n"), Error);
    const auto msg = error_message([] { parse_config("\n\nbogus = 1\n"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    try {
        load_config("/nonexistent.cfg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(Config, ReferenceFileMatchesFrozenCohort) {
    const auto cfg = load_config(CFPT_REFERENCE_CONFIG);
    EXPECT_EQ(cfg.cohort, reference_cohort_config(0));
    EXPECT_EQ(cfg.mode, Mode::MultiTask);
    EXPECT_EQ(cfg.train.loss.lambda, 0.5);
    EXPECT_EQ(cfg.train.loss.epsilon, 1.0);
    EXPECT_EQ(cfg.k, 5);
}

TEST(Config, CanonicalDumpRoundTrips) {
    auto cfg = load_config(CFPT_REFERENCE_CONFIG);
    const auto text = canonical_config(cfg);
    const auto back = parse_config(text);
    EXPECT_EQ(canonical_config(back), text);
    EXPECT_EQ(config_hash(back), config_hash(cfg));
    cfg.train.lr0 *= 2;
    EXPECT_NE(config_hash(cfg), config_hash(back));
}

TEST(Config, ApplyMode) {
    ExperimentConfig cfg;
    cfg.apply_mode(Mode::SingleTask);
    EXPECT_EQ(cfg.train.loss.lambda, 0.0);
    EXPECT_NO_THROW(cfg.validate());
    // Multi-task keeps whatever lambda the config holds, so zero is rejected.
    cfg.apply_mode(Mode::MultiTask);
    EXPECT_THROW(cfg.validate(), Error);
    EXPECT_EQ(parse_mode("multi_task"), Mode::MultiTask);
    EXPECT_THROW(parse_mode("both"), Error);
}
