// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shiftlab/autodiff/tensor.hpp"

namespace shiftlab::graph {

using Edge = std::pair<std::size_t, std::size_t>;

/// Attributed undirected graph with a class label and the id of the
/// environment (scaffold family) it was drawn from.
struct Graph {
  std::size_t n = 0;
  std::vector<Edge> edges;  // u < v, sorted, unique
  ad::Tensor x;             // n x d
  std::size_t y = 0;
  std::string env;

  std::size_t feature_dim() const { return x.rank() == 2 ? x.cols() : 0; }

  /// Throws ContractError when an invariant does not hold.
  void validate() const;

  bool operator==(const Graph&) const = default;
};

/// Normalises an arbitrary undirected edge list (orders endpoints, sorts,
/// drops duplicates) and validates the result. Self-loops are rejected.
Graph make_graph(std::size_t n, std::vector<Edge> edges, ad::Tensor x, std::size_t y, std::string env);

/// Graphs concatenated into one disjoint union. Message passing runs over
/// `arc_src -> arc_dst`, which lists every edge twice: arcs [0, E) go u->v and
/// arcs [E, 2E) go v->u, so an edge-aligned vector maps onto arcs by repetition.
struct GraphBatch {
  ad::Tensor x;                       // N x d
  std::vector<Edge> edges;            // node ids shifted by graph offset
  std::vector<std::size_t> graph_id;  // per node, non-decreasing
  std::vector<std::size_t> labels;    // per graph
  std::vector<std::string> envs;      // per graph
  std::vector<std::size_t> node_offset;  // B + 1 entries
  std::vector<std::size_t> edge_offset;  // B + 1 entries
  std::vector<std::size_t> arc_src;
  std::vector<std::size_t> arc_dst;

  std::size_t num_graphs() const { return labels.size(); }
  std::size_t num_nodes() const { return graph_id.size(); }
  std::size_t num_edges() const { return edges.size(); }
  std::size_t feature_dim() const { return x.cols(); }
  std::size_t nodes_in(std::size_t g) const { return node_offset[g + 1] - node_offset[g]; }
};

GraphBatch batch(std::span<const Graph> graphs);
std::vector<Graph> unbatch(const GraphBatch& b);

/// Builds a batch from graphs[indices[i]].
GraphBatch batch_subset(std::span<const Graph> graphs, std::span<const std::size_t> indices);

}  // namespace shiftlab::graph
