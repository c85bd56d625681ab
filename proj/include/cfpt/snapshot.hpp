#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "cfpt/network.hpp"

namespace cfpt {

/// Text snapshot of a trained network:
///
///   cfpt-snapshot 1
///   config_hash <16 hex digits>
///   seed <model seed>
///   input_dim <n>
///   hidden_dims <comma list, may be empty>
///   init_reg_bias_mean <0|1>
///   num_params <n>
///   <one parameter per line, shortest round-trip form>
struct Snapshot {
    Network network;
    std::uint64_t config_hash = 0;
};

std::string write_snapshot(const Network& net, std::uint64_t config_hash);
Snapshot read_snapshot(std::string_view text);

void save_snapshot(const std::filesystem::path& path, const Network& net, std::uint64_t config_hash);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace cfpt
