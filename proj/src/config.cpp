#include "cfpt/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>

#include "cfpt/csv.hpp"
#include "cfpt/error.hpp"

namespace cfpt {

std::string_view to_string(Mode mode) {
    return mode == Mode::SingleTask ? "single_task" : "multi_task";
}

Mode parse_mode(std::string_view s) {
    if (s == "single_task") return Mode::SingleTask;
    if (s == "multi_task") return Mode::MultiTask;
    fail(ErrorKind::Config, "mode must be single_task or multi_task, got '" + std::string(s) + "'");
}

void ExperimentConfig::apply_mode(Mode m) {
    mode = m;
    if (m == Mode::SingleTask) train.loss.lambda = 0.0;
}

void ExperimentConfig::validate() const {
    cohort.validate();
    train.validate();
    if (mode == Mode::SingleTask && train.loss.lambda != 0.0) {
        fail(ErrorKind::Config, "single_task mode requires loss.lambda = 0");
    }
    if (mode == Mode::MultiTask && !(train.loss.lambda > 0.0)) {
        fail(ErrorKind::Config, "multi_task mode requires loss.lambda > 0");
    }
    if (k < 2) fail(ErrorKind::Config, "crossval.k must be >= 2");
    if (!(train_val_ratio > 0.0)) fail(ErrorKind::Config, "crossval.train_val_ratio must be positive");
    if (eval.thresholds.empty()) fail(ErrorKind::Config, "eval.thresholds must not be empty");
    for (double t : eval.thresholds) {
        if (!(t > 0.0)) fail(ErrorKind::Config, "eval.thresholds must be positive");
    }
    if (!(eval.operating_point > 0.0 && eval.operating_point < 1.0)) {
        fail(ErrorKind::Config, "eval.operating_point must lie in (0, 1)");
    }
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_real(const std::string& key, const std::string& v) {
    try {
        return csv::parse_double(v);
    } catch (const Error&) {
        fail(ErrorKind::Config, key + ": expected a number, got '" + v + "'");
    }
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
    Int out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        fail(ErrorKind::Config, key + ": expected an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(ErrorKind::Config, key + ": expected true or false, got '" + v + "'");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& key, const std::string& v, F&& parse_one) {
    std::vector<T> out;
    if (trim(v).empty()) return out;
    for (const auto& item : csv::split_line(v)) out.push_back(parse_one(key, trim(item)));
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto real = [&t](const char* key, auto member) {
            t[key] = [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                member(c) = to_real(k, v);
            };
        };
        auto u64 = [&t](const char* key, auto member) {
            t[key] = [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                member(c) = to_int<std::uint64_t>(k, v);
            };
        };
        t["paths.data_dir"] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.data_dir = v; };
        t["paths.out_dir"] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out_dir = v; };

        u64("cohort.n_patients", [](ExperimentConfig& c) -> auto& { return c.cohort.n_patients; });
        real("cohort.cancer_fraction_target", [](ExperimentConfig& c) -> auto& { return c.cohort.cancer_fraction_target; });
        u64("cohort.feature_dim", [](ExperimentConfig& c) -> auto& { return c.cohort.feature_dim; });
        real("cohort.scan_interval", [](ExperimentConfig& c) -> auto& { return c.cohort.scan_interval; });
        real("cohort.study_horizon", [](ExperimentConfig& c) -> auto& { return c.cohort.study_horizon; });
        real("cohort.dropout_prob", [](ExperimentConfig& c) -> auto& { return c.cohort.dropout_prob; });
        real("cohort.onset_shape", [](ExperimentConfig& c) -> auto& { return c.cohort.onset_shape; });
        real("cohort.onset_scale", [](ExperimentConfig& c) -> auto& { return c.cohort.onset_scale; });
        real("cohort.risk_coeff", [](ExperimentConfig& c) -> auto& { return c.cohort.risk_coeff; });
        real("cohort.progression_gain", [](ExperimentConfig& c) -> auto& { return c.cohort.progression_gain; });
        real("cohort.noise_sd", [](ExperimentConfig& c) -> auto& { return c.cohort.noise_sd; });
        u64("cohort.seed", [](ExperimentConfig& c) -> auto& { return c.cohort.seed; });

        t["model.hidden_dims"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.model.hidden_dims = to_list<std::size_t>(k, v, to_int<std::size_t>);
        };
        u64("model.seed", [](ExperimentConfig& c) -> auto& { return c.model.seed; });
        t["model.init_reg_bias_mean"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.model.init_reg_bias_mean = to_bool(k, v);
        };

        t["train.max_epochs"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.train.max_epochs = to_int<int>(k, v);
        };
        real("train.lr0", [](ExperimentConfig& c) -> auto& { return c.train.lr0; });
        real("train.lr_decay_factor", [](ExperimentConfig& c) -> auto& { return c.train.lr_decay_factor; });
        t["train.lr_decay_epochs"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.train.lr_decay_epochs = to_list<int>(k, v, to_int<int>);
        };
        real("train.weight_decay", [](ExperimentConfig& c) -> auto& { return c.train.weight_decay; });
        u64("train.batch_size", [](ExperimentConfig& c) -> auto& { return c.train.batch_size; });
        u64("train.seed", [](ExperimentConfig& c) -> auto& { return c.train.seed; });

        real("loss.lambda", [](ExperimentConfig& c) -> auto& { return c.train.loss.lambda; });
        real("loss.epsilon", [](ExperimentConfig& c) -> auto& { return c.train.loss.epsilon; });
        real("loss.prob_clamp", [](ExperimentConfig& c) -> auto& { return c.train.loss.prob_clamp; });

        t["eval.thresholds"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.eval.thresholds = to_list<double>(k, v, to_real);
        };
        real("eval.operating_point", [](ExperimentConfig& c) -> auto& { return c.eval.operating_point; });

        t["crossval.k"] = [](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.k = to_int<int>(k, v);
        };
        real("crossval.train_val_ratio", [](ExperimentConfig& c) -> auto& { return c.train_val_ratio; });

        t["mode"] = [](ExperimentConfig& c, const std::string&, const std::string& v) { c.mode = parse_mode(v); };
        return t;
    }();
    return table;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::Config, "config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            fail(ErrorKind::Config, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            fail(ErrorKind::Config, "config line " + std::to_string(line_no) + ": repeated key '" + key + "'");
        }
        it->second(cfg, key, value);
    }
    if (cfg.mode == Mode::SingleTask) cfg.apply_mode(Mode::SingleTask);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = csv::read_file(path);
    } catch (const Error&) {
        fail(ErrorKind::Config, "cannot read config file '" + path.string() + "'");
    }
    return parse_config(text);
}

std::string canonical_config(const ExperimentConfig& c) {
    using csv::format_double;
    auto list = [](const auto& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i > 0) s += ",";
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(xs[i])>>) s += format_double(xs[i]);
            else s += std::to_string(xs[i]);
        }
        return s;
    };
    std::string out;
    auto kv = [&out](const char* k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
    kv("cohort.n_patients", std::to_string(c.cohort.n_patients));
    kv("cohort.cancer_fraction_target", format_double(c.cohort.cancer_fraction_target));
    kv("cohort.feature_dim", std::to_string(c.cohort.feature_dim));
    kv("cohort.scan_interval", format_double(c.cohort.scan_interval));
    kv("cohort.study_horizon", format_double(c.cohort.study_horizon));
    kv("cohort.dropout_prob", format_double(c.cohort.dropout_prob));
    kv("cohort.onset_shape", format_double(c.cohort.onset_shape));
    kv("cohort.onset_scale", format_double(c.cohort.onset_scale));
    kv("cohort.risk_coeff", format_double(c.cohort.risk_coeff));
    kv("cohort.progression_gain", format_double(c.cohort.progression_gain));
    kv("cohort.noise_sd", format_double(c.cohort.noise_sd));
    kv("cohort.seed", std::to_string(c.cohort.seed));
    kv("model.hidden_dims", list(c.model.hidden_dims));
    kv("model.seed", std::to_string(c.model.seed));
    kv("model.init_reg_bias_mean", c.model.init_reg_bias_mean ? "true" : "false");
    kv("train.max_epochs", std::to_string(c.train.max_epochs));
    kv("train.lr0", format_double(c.train.lr0));
    kv("train.lr_decay_factor", format_double(c.train.lr_decay_factor));
    kv("train.lr_decay_epochs", list(c.train.lr_decay_epochs));
    kv("train.weight_decay", format_double(c.train.weight_decay));
    kv("train.batch_size", std::to_string(c.train.batch_size));
    kv("train.seed", std::to_string(c.train.seed));
    kv("loss.lambda", format_double(c.train.loss.lambda));
    kv("loss.epsilon", format_double(c.train.loss.epsilon));
    kv("loss.prob_clamp", format_double(c.train.loss.prob_clamp));
    kv("eval.thresholds", list(c.eval.thresholds));
    kv("eval.operating_point", format_double(c.eval.operating_point));
    kv("crossval.k", std::to_string(c.k));
    kv("crossval.train_val_ratio", format_double(c.train_val_ratio));
    kv("mode", std::string(to_string(c.mode)));
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace cfpt
