// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/cli/config.hpp"

#include <fstream>

#include "shiftlab/errors.hpp"

namespace shiftlab::cli {

void to_json(nlohmann::json& j, const CliConfig& c) { j = {{"spec", c.spec}, {"train", c.train}, {"out_dir", c.out_dir}}; }

CliConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ContractError("config must be a JSON object");
  CliConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "spec") c.spec = value.get<synth::ShiftSpec>();
      else if (key == "train") c.train = value.get<train::TrainConfig>();
      else if (key == "out_dir") c.out_dir = value.get<std::string>();
      else throw ContractError("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ContractError("bad value under config key '" + key + "': " + e.what());
    }
  }
  return c;
}

void apply_override(nlohmann::json& doc, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ContractError("empty override key");
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::parse_error&) {
    parsed = value;
  }
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ContractError("malformed override key '" + dotted_key + "'");
    if (!node->is_object()) throw ContractError("override key '" + dotted_key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

CliConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  nlohmann::json doc = nlohmann::json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open config " + path.string());
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ContractError("malformed config " + path.string() + ": " + e.what());
    }
  }
  for (const std::string& o : overrides) {
    std::string text = o;
    if (text.rfind("--", 0) == 0) text = text.substr(2);
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos) throw ContractError("override '" + o + "' is not of the form --key=value");
    apply_override(doc, text.substr(0, eq), text.substr(eq + 1));
  }
  CliConfig c = config_from_json(doc);
  c.spec.validate();
  c.train.validate();
  return c;
}

}  // namespace shiftlab::cli
