// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/synth/shift_spec.hpp"

#include <algorithm>
#include <set>

#include "shiftlab/errors.hpp"

namespace shiftlab::synth {

std::string to_string(ShiftMode mode) {
  switch (mode) {
    case ShiftMode::kCovariate: return "covariate";
    case ShiftMode::kCorrelation: return "correlation";
    case ShiftMode::kIid: return "iid";
  }
  return "?";
}

ShiftMode parse_shift_mode(const std::string& s) {
  if (s == "covariate") return ShiftMode::kCovariate;
  if (s == "correlation") return ShiftMode::kCorrelation;
  if (s == "iid") return ShiftMode::kIid;
  throw ContractError("unknown shift mode '" + s + "' (expected covariate, correlation or iid)");
}

const std::vector<std::string>& motif_catalog() {
  static const std::vector<std::string> names{"triangle", "house", "cycle5", "diamond", "k4", "cycle4"};
  return names;
}

const std::vector<std::string>& scaffold_catalog() {
  static const std::vector<std::string> names{"path", "star", "tree", "cycle", "ladder", "wheel"};
  return names;
}

std::size_t motif_node_count(const std::string& motif) {
  if (motif == "triangle") return 3;
  if (motif == "house" || motif == "cycle5") return 5;
  if (motif == "diamond" || motif == "k4" || motif == "cycle4") return 4;
  throw ContractError("unknown motif '" + motif + "'");
}

std::size_t motif_edge_count(const std::string& motif) {
  if (motif == "triangle") return 3;
  if (motif == "house" || motif == "k4") return 6;
  if (motif == "cycle5" || motif == "diamond") return 5;
  if (motif == "cycle4") return 4;
  throw ContractError("unknown motif '" + motif + "'");
}

void ShiftSpec::validate() const {
  if (num_classes < 2) throw ContractError("num_classes must be at least 2");
  if (motifs.size() != num_classes) {
    throw ContractError("need exactly one motif per class: " + std::to_string(motifs.size()) + " motifs for " +
                        std::to_string(num_classes) + " classes");
  }
  if (std::set<std::string>(motifs.begin(), motifs.end()).size() != motifs.size()) {
    throw ContractError("motifs must be distinct across classes");
  }
  for (const auto& m : motifs) motif_node_count(m);

  const auto& scaffolds = scaffold_catalog();
  auto check_pool = [&](const std::vector<std::string>& pool, const char* name) {
    if (pool.empty()) throw ContractError(std::string(name) + " is empty");
    for (const auto& s : pool) {
      if (std::find(scaffolds.begin(), scaffolds.end(), s) == scaffolds.end()) {
        throw ContractError(std::string(name) + ": unknown scaffold '" + s + "'");
      }
    }
  };
  check_pool(train_pool, "train_pool");
  check_pool(valid_pool, "valid_pool");
  check_pool(test_pool, "test_pool");

  auto check_range = [](const SizeRange& r, const char* name) {
    if (r.first < 4 || r.first > r.second) {
      throw ContractError(std::string(name) + " must satisfy 4 <= min <= max");
    }
  };
  check_range(scaffold_size, "scaffold_size");
  if (valid_scaffold_size) check_range(*valid_scaffold_size, "valid_scaffold_size");
  if (test_scaffold_size) check_range(*test_scaffold_size, "test_scaffold_size");

  if (attach_count < 1) throw ContractError("attach_count must be at least 1");
  std::size_t min_motif = motif_node_count(motifs.front());
  for (const auto& m : motifs) min_motif = std::min(min_motif, motif_node_count(m));
  std::size_t min_scaffold = scaffold_size.first;
  if (valid_scaffold_size) min_scaffold = std::min(min_scaffold, valid_scaffold_size->first);
  if (test_scaffold_size) min_scaffold = std::min(min_scaffold, test_scaffold_size->first);
  if (attach_count > min_motif * min_scaffold) {
    throw ContractError("attach_count exceeds the number of possible motif-scaffold bridges");
  }
  if (!(feature_noise >= 0.0)) throw ContractError("feature_noise must be non-negative");
  if (train_size == 0 || valid_size == 0 || test_size == 0) throw ContractError("split sizes must be positive");
  if (!(correlation_bias >= 0.0 && correlation_bias <= 1.0)) throw ContractError("correlation_bias must lie in [0,1]");

  if (mode == ShiftMode::kCovariate) {
    for (const auto& s : test_pool) {
      if (std::find(train_pool.begin(), train_pool.end(), s) != train_pool.end()) {
        throw ContractError("covariate mode requires disjoint train/test pools; '" + s + "' is in both");
      }
    }
  }
  if (mode == ShiftMode::kIid && !(train_pool == valid_pool && train_pool == test_pool)) {
    throw ContractError("iid mode requires identical scaffold pools");
  }
}

namespace {

nlohmann::json range_json(const SizeRange& r) { return nlohmann::json::array({r.first, r.second}); }

SizeRange range_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ContractError("size range must be [min, max]");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

}  // namespace

void to_json(nlohmann::json& j, const ShiftSpec& s) {
  j = nlohmann::json{{"num_classes", s.num_classes},
                     {"motifs", s.motifs},
                     {"train_pool", s.train_pool},
                     {"valid_pool", s.valid_pool},
                     {"test_pool", s.test_pool},
                     {"scaffold_size", range_json(s.scaffold_size)},
                     {"attach_count", s.attach_count},
                     {"feature_noise", s.feature_noise},
                     {"train_size", s.train_size},
                     {"valid_size", s.valid_size},
                     {"test_size", s.test_size},
                     {"seed", s.seed},
                     {"mode", to_string(s.mode)},
                     {"correlation_bias", s.correlation_bias}};
  if (s.valid_scaffold_size) j["valid_scaffold_size"] = range_json(*s.valid_scaffold_size);
  if (s.test_scaffold_size) j["test_scaffold_size"] = range_json(*s.test_scaffold_size);
}

void from_json(const nlohmann::json& j, ShiftSpec& s) {
  if (!j.is_object()) throw ContractError("shift spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "num_classes") s.num_classes = value.get<std::size_t>();
      else if (key == "motifs") s.motifs = value.get<std::vector<std::string>>();
      else if (key == "train_pool") s.train_pool = value.get<std::vector<std::string>>();
      else if (key == "valid_pool") s.valid_pool = value.get<std::vector<std::string>>();
      else if (key == "test_pool") s.test_pool = value.get<std::vector<std::string>>();
      else if (key == "scaffold_size") s.scaffold_size = range_from(value);
      else if (key == "valid_scaffold_size") s.valid_scaffold_size = range_from(value);
      else if (key == "test_scaffold_size") s.test_scaffold_size = range_from(value);
      else if (key == "attach_count") s.attach_count = value.get<std::size_t>();
      else if (key == "feature_noise") s.feature_noise = value.get<double>();
      else if (key == "train_size") s.train_size = value.get<std::size_t>();
      else if (key == "valid_size") s.valid_size = value.get<std::size_t>();
      else if (key == "test_size") s.test_size = value.get<std::size_t>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else if (key == "mode") s.mode = parse_shift_mode(value.get<std::string>());
      else if (key == "correlation_bias") s.correlation_bias = value.get<double>();
      else throw ContractError("unknown shift spec key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ContractError("bad value for shift spec key '" + key + "': " + e.what());
    }
  }
}

}  // namespace shiftlab::synth
