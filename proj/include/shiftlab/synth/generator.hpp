// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shiftlab/graph/graph.hpp"
#include "shiftlab/synth/shift_spec.hpp"

namespace shiftlab::synth {

/// Discrete distribution over environment ids.
using EnvDist = std::map<std::string, double>;

enum class Split { kTrain = 0, kValid = 1, kTest = 2 };

struct DatasetBundle {
  std::vector<graph::Graph> train;
  std::vector<graph::Graph> valid;
  std::vector<graph::Graph> test;
  ShiftSpec spec;
  /// Sampling distributions the scaffolds were drawn from.
  EnvDist p_train;
  EnvDist p_valid;
  EnvDist p_test;

  const std::vector<graph::Graph>& split(Split s) const;
  bool operator==(const DatasetBundle&) const = default;
};

/// Each graph is its class motif (nodes [0, k)) plus a vertex-disjoint
/// scaffold (nodes [k, n)) joined by attach_count bridge edges. Node features
/// are one-hot degree buckets plus Gaussian noise. Graph i of a split draws
/// from its own stream keyed by (seed, split, i).
DatasetBundle generate(const ShiftSpec& spec);

graph::Graph generate_graph(const ShiftSpec& spec, Split split, std::size_t index);

/// Sampling distribution over scaffold ids for a split.
EnvDist env_distribution(const ShiftSpec& spec, Split split);

/// Ground-truth stable nodes of a generated graph (the planted motif).
std::vector<std::size_t> motif_nodes(const ShiftSpec& spec, const graph::Graph& g);

/// Graph covariate shift: half the absolute mass on support points where
/// exactly one distribution is nonzero. Both inputs must sum to 1 (1e-9).
double gcs(const EnvDist& p_tr, const EnvDist& p_ts);

EnvDist empirical_env_dist(std::span<const graph::Graph> graphs);

/// Writes train/valid/test JSONL (".jsonl" or ".jsonl.gz") plus manifest.json.
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir, bool gzip = false);
DatasetBundle load_bundle(const std::filesystem::path& dir);

}  // namespace shiftlab::synth
