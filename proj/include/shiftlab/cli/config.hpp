// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "shiftlab/synth/shift_spec.hpp"
#include "shiftlab/train/trainer.hpp"

namespace shiftlab::cli {

/// {"spec": {...}, "train": {...}, "out_dir": "..."}; absent keys keep defaults.
struct CliConfig {
  synth::ShiftSpec spec;
  train::TrainConfig train;
  std::string out_dir = "runs";

  bool operator==(const CliConfig&) const = default;
};

void to_json(nlohmann::json& j, const CliConfig& c);
/// Unknown keys at any level are rejected with the offending key named.
CliConfig config_from_json(const nlohmann::json& j);

/// Sets a dotted path ("train.weights.tau") in a JSON document. The value text
/// is parsed as JSON when possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& dotted_key, const std::string& value);

/// Reads the JSON file (empty path -> defaults), applies "--key=value"
/// overrides in order and validates the result.
CliConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

}  // namespace shiftlab::cli
