#include "cfpt/snapshot.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "cfpt/csv.hpp"
#include "cfpt/error.hpp"

namespace cfpt {

namespace {

constexpr std::string_view kMagic = "cfpt-snapshot 1";

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

template <typename Int>
Int parse_int(std::string_view s, int base = 10) {
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        fail(ErrorKind::Schema, "snapshot: bad integer '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::string write_snapshot(const Network& net, std::uint64_t config_hash) {
    const auto& cfg = net.config();
    std::string out(kMagic);
    out += "\nconfig_hash " + hex64(config_hash) + "\n";
    out += "seed " + std::to_string(cfg.seed) + "\n";
    out += "input_dim " + std::to_string(cfg.input_dim) + "\n";
    out += "hidden_dims ";
    for (std::size_t i = 0; i < cfg.hidden_dims.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(cfg.hidden_dims[i]);
    }
    out += "\ninit_reg_bias_mean " + std::string(cfg.init_reg_bias_mean ? "1" : "0") + "\n";
    out += "num_params " + std::to_string(net.num_params()) + "\n";
    for (double p : net.params()) out += csv::format_double(p) + "\n";
    return out;
}

Snapshot read_snapshot(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
    }
    if (lines.size() < 7 || lines[0] != kMagic) {
        fail(ErrorKind::Schema, "snapshot: missing or unsupported header");
    }
    auto field = [&lines](std::size_t i, std::string_view key) {
        const auto line = lines[i];
        if (line.substr(0, key.size()) != key || line.size() < key.size() + 1 || line[key.size()] != ' ') {
            fail(ErrorKind::Schema, "snapshot: expected '" + std::string(key) + "' on line " + std::to_string(i + 1));
        }
        return line.substr(key.size() + 1);
    };
    const auto hash = parse_int<std::uint64_t>(field(1, "config_hash"), 16);
    ModelConfig cfg;
    cfg.seed = parse_int<std::uint64_t>(field(2, "seed"));
    cfg.input_dim = parse_int<std::size_t>(field(3, "input_dim"));
    cfg.hidden_dims.clear();
    const auto dims = field(4, "hidden_dims");
    if (!dims.empty()) {
        for (const auto& d : csv::split_line(dims)) cfg.hidden_dims.push_back(parse_int<std::size_t>(d));
    }
    cfg.init_reg_bias_mean = parse_int<int>(field(5, "init_reg_bias_mean")) != 0;
    const auto n = parse_int<std::size_t>(field(6, "num_params"));

    Network net(cfg);
    if (net.num_params() != n || lines.size() != 7 + n) {
        fail(ErrorKind::Schema, "snapshot: parameter count does not match the architecture");
    }
    auto params = net.params();
    for (std::size_t i = 0; i < n; ++i) {
        try {
            params[i] = csv::parse_double(lines[7 + i]);
        } catch (const Error&) {
            fail(ErrorKind::Schema, "snapshot: bad parameter on line " + std::to_string(8 + i));
        }
    }
    return {std::move(net), hash};
}

void save_snapshot(const std::filesystem::path& path, const Network& net, std::uint64_t config_hash) {
    csv::write_file(path, write_snapshot(net, config_hash));
}

Snapshot load_snapshot(const std::filesystem::path& path) {
    return read_snapshot(csv::read_file(path));
}

}  // namespace cfpt
