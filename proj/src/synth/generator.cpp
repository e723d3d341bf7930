// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/synth/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "shiftlab/errors.hpp"
#include "shiftlab/graph/jsonl.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab::synth {
namespace {

using graph::Edge;

std::vector<Edge> motif_edges(const std::string& motif) {
  if (motif == "triangle") return {{0, 1}, {1, 2}, {0, 2}};
  if (motif == "house") return {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 4}, {1, 4}};
  if (motif == "cycle5") return {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}};
  if (motif == "diamond") return {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}};
  if (motif == "k4") return {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  if (motif == "cycle4") return {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  throw ContractError("unknown motif '" + motif + "'");
}

// Scaffold on nodes [0, k'); returns k' (ladders round down to even).
std::size_t scaffold_edges(const std::string& kind, std::size_t k, Stream& rng, std::vector<Edge>& out) {
  if (kind == "path") {
    for (std::size_t i = 0; i + 1 < k; ++i) out.emplace_back(i, i + 1);
    return k;
  }
  if (kind == "star") {
    for (std::size_t i = 1; i < k; ++i) out.emplace_back(0, i);
    return k;
  }
  if (kind == "tree") {
    for (std::size_t i = 1; i < k; ++i) out.emplace_back(rng.below(i), i);
    return k;
  }
  if (kind == "cycle") {
    for (std::size_t i = 0; i + 1 < k; ++i) out.emplace_back(i, i + 1);
    out.emplace_back(0, k - 1);
    return k;
  }
  if (kind == "ladder") {
    const std::size_t rung = k / 2;
    for (std::size_t i = 0; i < rung; ++i) {
      out.emplace_back(i, rung + i);
      if (i + 1 < rung) {
        out.emplace_back(i, i + 1);
        out.emplace_back(rung + i, rung + i + 1);
      }
    }
    return 2 * rung;
  }
  if (kind == "wheel") {
    for (std::size_t i = 1; i < k; ++i) {
      out.emplace_back(0, i);
      out.emplace_back(i, i + 1 < k ? i + 1 : 1);
    }
    return k;
  }
  throw ContractError("unknown scaffold '" + kind + "'");
}

const std::vector<std::string>& pool_of(const ShiftSpec& spec, Split split) {
  switch (split) {
    case Split::kTrain: return spec.train_pool;
    case Split::kValid: return spec.valid_pool;
    case Split::kTest: return spec.test_pool;
  }
  return spec.train_pool;
}

std::size_t split_size(const ShiftSpec& spec, Split split) {
  switch (split) {
    case Split::kTrain: return spec.train_size;
    case Split::kValid: return spec.valid_size;
    case Split::kTest: return spec.test_size;
  }
  return 0;
}

SizeRange size_range(const ShiftSpec& spec, Split split) {
  if (split == Split::kValid && spec.valid_scaffold_size) return *spec.valid_scaffold_size;
  if (split == Split::kTest && spec.test_scaffold_size) return *spec.test_scaffold_size;
  return spec.scaffold_size;
}

void check_normalized(const EnvDist& p, const char* name) {
  double total = 0.0;
  for (const auto& [env, mass] : p) {
    if (!(mass >= 0.0)) throw ContractError(std::string(name) + " has negative mass on '" + env + "'");
    total += mass;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractError(std::string(name) + " sums to " + std::to_string(total) + ", not 1");
  }
}

}  // namespace

const std::vector<graph::Graph>& DatasetBundle::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValid: return valid;
    case Split::kTest: return test;
  }
  return train;
}

EnvDist env_distribution(const ShiftSpec& spec, Split split) {
  const auto& pool = pool_of(spec, split);
  EnvDist p;
  const double uniform = 1.0 / static_cast<double>(pool.size());
  if (spec.mode == ShiftMode::kCorrelation && split == Split::kTrain) {
    // Classes are balanced, so each class contributes 1/C of the mass.
    const double per_class = 1.0 / static_cast<double>(spec.num_classes);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      p[pool[c % pool.size()]] += per_class * spec.correlation_bias;
      for (const auto& s : pool) p[s] += per_class * (1.0 - spec.correlation_bias) * uniform;
    }
  } else {
    for (const auto& s : pool) p[s] += uniform;
  }
  std::erase_if(p, [](const auto& kv) { return kv.second == 0.0; });
  return p;
}

graph::Graph generate_graph(const ShiftSpec& spec, Split split, std::size_t index) {
  Stream rng{spec.seed, static_cast<std::uint64_t>(split), index};
  const std::size_t label = index % spec.num_classes;
  const auto& pool = pool_of(spec, split);

  std::string scaffold;
  if (spec.mode == ShiftMode::kCorrelation && split == Split::kTrain && rng.uniform() < spec.correlation_bias) {
    scaffold = pool[label % pool.size()];
  } else {
    scaffold = pool[rng.below(pool.size())];
  }
  const SizeRange range = size_range(spec, split);
  const std::size_t k_req = range.first + rng.below(range.second - range.first + 1);

  const std::string& motif = spec.motifs[label];
  std::vector<Edge> edges = motif_edges(motif);
  const std::size_t m = motif_node_count(motif);

  std::vector<Edge> sc;
  const std::size_t k = scaffold_edges(scaffold, k_req, rng, sc);
  for (const auto& [u, v] : sc) edges.emplace_back(u + m, v + m);

  std::set<Edge> bridges;
  while (bridges.size() < spec.attach_count) {
    bridges.emplace(rng.below(m), m + rng.below(k));
  }
  edges.insert(edges.end(), bridges.begin(), bridges.end());

  const std::size_t n = m + k;
  std::vector<std::size_t> degree(n, 0);
  for (const auto& [u, v] : edges) {
    ++degree[u];
    ++degree[v];
  }
  ad::Tensor x({n, kFeatureDim});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bucket = std::min(std::max<std::size_t>(degree[i], 1), kFeatureDim) - 1;
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
      x.at(i, j) = (j == bucket ? 1.0 : 0.0) + spec.feature_noise * rng.normal();
    }
  }
  return graph::make_graph(n, std::move(edges), std::move(x), label, scaffold);
}

DatasetBundle generate(const ShiftSpec& spec) {
  spec.validate();
  DatasetBundle bundle;
  bundle.spec = spec;
  for (Split split : {Split::kTrain, Split::kValid, Split::kTest}) {
    auto& out = split == Split::kTrain ? bundle.train : split == Split::kValid ? bundle.valid : bundle.test;
    const std::size_t count = split_size(spec, split);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_graph(spec, split, i));
  }
  bundle.p_train = env_distribution(spec, Split::kTrain);
  bundle.p_valid = env_distribution(spec, Split::kValid);
  bundle.p_test = env_distribution(spec, Split::kTest);
  return bundle;
}

std::vector<std::size_t> motif_nodes(const ShiftSpec& spec, const graph::Graph& g) {
  if (g.y >= spec.motifs.size()) throw ContractError("label outside the motif catalog of this spec");
  const std::size_t m = motif_node_count(spec.motifs[g.y]);
  std::vector<std::size_t> nodes(m);
  for (std::size_t i = 0; i < m; ++i) nodes[i] = i;
  return nodes;
}

double gcs(const EnvDist& p_tr, const EnvDist& p_ts) {
  check_normalized(p_tr, "p_tr");
  check_normalized(p_ts, "p_ts");
  auto mass = [](const EnvDist& p, const std::string& k) {
    auto it = p.find(k);
    return it == p.end() ? 0.0 : it->second;
  };
  std::set<std::string> support;
  for (const auto& [k, v] : p_tr) support.insert(k);
  for (const auto& [k, v] : p_ts) support.insert(k);
  // Exclusive mass as a fraction of each total, so disjoint supports give exactly 1.
  double only_tr = 0.0, only_ts = 0.0, sum_tr = 0.0, sum_ts = 0.0;
  for (const auto& k : support) {
    const double a = mass(p_tr, k), b = mass(p_ts, k);
    sum_tr += a;
    sum_ts += b;
    if (a > 0.0 && b <= 0.0) only_tr += a;
    if (b > 0.0 && a <= 0.0) only_ts += b;
  }
  return 0.5 * (only_tr / sum_tr + only_ts / sum_ts);
}

EnvDist empirical_env_dist(std::span<const graph::Graph> graphs) {
  if (graphs.empty()) throw ContractError("empirical_env_dist needs at least one graph");
  std::map<std::string, std::size_t> counts;
  for (const auto& g : graphs) ++counts[g.env];
  EnvDist p;
  const auto total = static_cast<double>(graphs.size());
  for (const auto& [env, c] : counts) p[env] = static_cast<double>(c) / total;
  return p;
}

void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir, bool gzip) {
  std::filesystem::create_directories(dir);
  const std::string ext = gzip ? ".jsonl.gz" : ".jsonl";
  graph::write_jsonl(dir / ("train" + ext), bundle.train);
  graph::write_jsonl(dir / ("valid" + ext), bundle.valid);
  graph::write_jsonl(dir / ("test" + ext), bundle.test);

  nlohmann::json manifest;
  manifest["spec"] = bundle.spec;
  manifest["format"] = gzip ? "jsonl.gz" : "jsonl";
  manifest["counts"] = {{"train", bundle.train.size()}, {"valid", bundle.valid.size()}, {"test", bundle.test.size()}};
  manifest["p_train"] = bundle.p_train;
  manifest["p_valid"] = bundle.p_valid;
  manifest["p_test"] = bundle.p_test;
  manifest["gcs"] = gcs(bundle.p_train, bundle.p_test);
  manifest["gcs_empirical"] = gcs(empirical_env_dist(bundle.train), empirical_env_dist(bundle.test));
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
}

DatasetBundle load_bundle(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("no manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("malformed manifest.json: " + std::string(e.what()));
  }
  DatasetBundle bundle;
  bundle.spec = manifest.at("spec").get<ShiftSpec>();
  const std::string ext = manifest.value("format", "jsonl") == "jsonl.gz" ? ".jsonl.gz" : ".jsonl";
  bundle.train = graph::read_jsonl(dir / ("train" + ext));
  bundle.valid = graph::read_jsonl(dir / ("valid" + ext));
  bundle.test = graph::read_jsonl(dir / ("test" + ext));
  bundle.p_train = env_distribution(bundle.spec, Split::kTrain);
  bundle.p_valid = env_distribution(bundle.spec, Split::kValid);
  bundle.p_test = env_distribution(bundle.spec, Split::kTest);
  return bundle;
}

}  // namespace shiftlab::synth
