// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/graph/graph.hpp"

#include <algorithm>

#include "shiftlab/errors.hpp"

namespace shiftlab::graph {

void Graph::validate() const {
  if (x.rank() != 2 || x.rows() != n) {
    throw ContractError("feature matrix " + ad::shape_str(x.shape()) + " does not have " + std::to_string(n) + " rows");
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    if (!(u < v)) throw ContractError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") is not ordered u<v");
    if (v >= n) throw ContractError("edge endpoint " + std::to_string(v) + " >= node count " + std::to_string(n));
    if (i > 0 && !(edges[i - 1] < edges[i])) throw ContractError("edge list not sorted and unique");
  }
}

Graph make_graph(std::size_t n, std::vector<Edge> edges, ad::Tensor x, std::size_t y, std::string env) {
  for (auto& [u, v] : edges) {
    if (u == v) throw ContractError("self-loop on node " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  Graph g{n, std::move(edges), std::move(x), y, std::move(env)};
  g.validate();
  return g;
}

GraphBatch batch_subset(std::span<const Graph> graphs, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("cannot batch an empty list of graphs");
  const std::size_t d = graphs[indices[0]].feature_dim();
  std::size_t total_nodes = 0, total_edges = 0;
  for (std::size_t idx : indices) {
    const Graph& g = graphs[idx];
    if (g.feature_dim() != d) {
      throw ContractError("mixed feature dimensions: " + std::to_string(d) + " and " + std::to_string(g.feature_dim()));
    }
    total_nodes += g.n;
    total_edges += g.edges.size();
  }

  GraphBatch b;
  b.x = ad::Tensor({total_nodes, d});
  b.edges.reserve(total_edges);
  b.graph_id.reserve(total_nodes);
  b.node_offset.push_back(0);
  b.edge_offset.push_back(0);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Graph& g = graphs[indices[k]];
    std::copy(g.x.data().begin(), g.x.data().end(), b.x.data().begin() + static_cast<std::ptrdiff_t>(offset * d));
    for (const auto& [u, v] : g.edges) b.edges.emplace_back(u + offset, v + offset);
    b.graph_id.insert(b.graph_id.end(), g.n, k);
    b.labels.push_back(g.y);
    b.envs.push_back(g.env);
    offset += g.n;
    b.node_offset.push_back(offset);
    b.edge_offset.push_back(b.edges.size());
  }

  const std::size_t e = b.edges.size();
  b.arc_src.resize(2 * e);
  b.arc_dst.resize(2 * e);
  for (std::size_t i = 0; i < e; ++i) {
    b.arc_src[i] = b.edges[i].first;
    b.arc_dst[i] = b.edges[i].second;
    b.arc_src[e + i] = b.edges[i].second;
    b.arc_dst[e + i] = b.edges[i].first;
  }
  return b;
}

GraphBatch batch(std::span<const Graph> graphs) {
  std::vector<std::size_t> all(graphs.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return batch_subset(graphs, all);
}

std::vector<Graph> unbatch(const GraphBatch& b) {
  std::vector<Graph> out;
  out.reserve(b.num_graphs());
  const std::size_t d = b.feature_dim();
  for (std::size_t k = 0; k < b.num_graphs(); ++k) {
    const std::size_t lo = b.node_offset[k], hi = b.node_offset[k + 1];
    Graph g;
    g.n = hi - lo;
    g.x = ad::Tensor({g.n, d},
                     std::vector<double>(b.x.data().begin() + static_cast<std::ptrdiff_t>(lo * d),
                                         b.x.data().begin() + static_cast<std::ptrdiff_t>(hi * d)));
    for (std::size_t e = b.edge_offset[k]; e < b.edge_offset[k + 1]; ++e) {
      g.edges.emplace_back(b.edges[e].first - lo, b.edges[e].second - lo);
    }
    g.y = b.labels[k];
    g.env = b.envs[k];
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace shiftlab::graph
