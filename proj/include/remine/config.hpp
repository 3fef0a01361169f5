// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace remine {

/// One flat bag of run settings shared by every subcommand. A config file
/// provides defaults; command-line flags override field by field. The file
/// form round-trips losslessly.
struct RunConfig {
  std::optional<std::string> catalog;
  std::optional<std::string> manifest;
  std::optional<std::string> detections;
  std::optional<std::string> out;
  std::optional<std::string> profile;
  std::optional<std::string> degrade;
  std::optional<std::string> r_org;
  std::optional<std::string> r_hsm;
  std::optional<std::string> index;
  std::optional<std::string> test;
  std::optional<std::string> healthy;
  std::optional<std::string> gate;
  std::optional<std::string> tag;
  std::optional<std::string> theta_mode;
  std::optional<std::string> log;
  std::optional<int> theta;
  std::optional<int> threads;
  std::optional<double> conf_floor;
  std::optional<std::uint64_t> seed;

  /// Fields set in `overrides` replace the corresponding fields here.
  void apply_overrides(const RunConfig& overrides);

  bool operator==(const RunConfig&) const = default;
};

RunConfig load_config(const std::filesystem::path& file);
void save_config(const RunConfig& config, const std::filesystem::path& file);

std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);

}  // namespace remine
