#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cfpt/commands.hpp"
#include "cfpt/error.hpp"

namespace {

// Exit codes: 0 success, 2 usage, 3 library error, 4 failed check.
int report_error(std::string_view kind, const std::string& what) {
    std::cerr << "error[" << kind << "]: " << what << "\n";
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Censored multi-task diagnosis and cancer-free progression time toolkit"};
    app.require_subcommand(1);

    cfpt::SynthOptions synth;
    std::optional<std::uint64_t> synth_seed;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic screening cohort");
    synth_cmd->add_option("--config", synth.config, "Experiment config file")->required();
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "Override cohort.seed");

    std::string label_patients;
    std::string label_out;
    auto* label_cmd = app.add_subcommand("label", "Derive per-scan labels from a patients CSV");
    label_cmd->add_option("patients", label_patients, "patients.csv")->required();
    label_cmd->add_option("--out", label_out, "Output directory for labels.csv")->required();

    cfpt::CrossvalOptions cv;
    std::optional<std::string> cv_data;
    std::optional<std::uint64_t> cv_seed;
    std::optional<std::string> cv_mode;
    auto* cv_cmd = app.add_subcommand("crossval", "Patient-level k-fold training with pooled test predictions");
    cv_cmd->add_option("--config", cv.config, "Experiment config file")->required();
    cv_cmd->add_option("--data", cv_data, "Directory holding labels.csv and scans.csv");
    cv_cmd->add_option("--out", cv.out, "Output directory")->required();
    cv_cmd->add_option("--seed", cv_seed, "Override model.seed and train.seed");
    cv_cmd->add_option("--mode", cv_mode, "single_task or multi_task")
        ->check(CLI::IsMember({"single_task", "multi_task"}));

    cfpt::EvalCommandOptions ev;
    std::optional<std::string> ev_b;
    std::optional<std::string> ev_config;
    std::optional<std::vector<double>> ev_thresholds;
    std::optional<double> ev_op;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate pooled predictions");
    eval_cmd->add_option("--predictions", ev.predictions, "predictions.csv")->required();
    eval_cmd->add_option("--predictions-b", ev_b, "Second predictions.csv for a paired comparison");
    eval_cmd->add_option("--labels", ev.labels, "labels.csv")->required();
    eval_cmd->add_option("--out", ev.out, "Output directory")->required();
    eval_cmd->add_option("--config", ev_config, "Experiment config (eval.* keys)");
    eval_cmd->add_option("--thresholds", ev_thresholds, "Region thresholds in years")->delimiter(',');
    eval_cmd->add_option("--operating-point", ev_op, "Probability cut for the paired comparison");

    std::string km_labels;
    std::string km_out;
    auto* km_cmd = app.add_subcommand("km", "Kaplan-Meier curve of a labels CSV (one time per patient)");
    km_cmd->add_option("labels", km_labels, "labels.csv")->required();
    km_cmd->add_option("--out", km_out, "Output directory")->required();

    cfpt::LossCheckOptions lc;
    std::optional<double> lc_t;
    auto* lc_cmd = app.add_subcommand("losscheck", "Evaluate or gradient-check the censored regression loss");
    lc_cmd->add_option("--t-pred", lc_t, "Predicted CFPT (omit for a random sweep)");
    lc_cmd->add_option("--t-d", lc.t_d, "Defined CFPT");
    lc_cmd->add_option("--p", lc.p, "Patient cancer indicator")->check(CLI::IsMember({0, 1}));
    lc_cmd->add_option("--epsilon", lc.epsilon, "Margin");
    lc_cmd->add_option("--samples", lc.samples, "Sweep size");
    lc_cmd->add_option("--seed", lc.seed, "Sweep seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*synth_cmd) {
            synth.seed = synth_seed;
            cfpt::cmd_synth(synth, std::cout);
        } else if (*label_cmd) {
            cfpt::cmd_label(label_patients, label_out, std::cout);
        } else if (*cv_cmd) {
            if (cv_data) cv.data = *cv_data;
            cv.seed = cv_seed;
            if (cv_mode) cv.mode = cfpt::parse_mode(*cv_mode);
            cfpt::cmd_crossval(cv, std::cout);
        } else if (*eval_cmd) {
            if (ev_b) ev.predictions_b = *ev_b;
            if (ev_config) ev.config = *ev_config;
            ev.thresholds = ev_thresholds;
            ev.operating_point = ev_op;
            cfpt::cmd_eval(ev, std::cout);
        } else if (*km_cmd) {
            cfpt::cmd_km(km_labels, km_out, std::cout);
        } else if (*lc_cmd) {
            lc.t_pred = lc_t;
            if (!cfpt::cmd_losscheck(lc, std::cout)) return 4;
        }
    } catch (const cfpt::Error& e) {
        return report_error(cfpt::to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
        return report_error("internal", e.what());
    }
    return 0;
}
