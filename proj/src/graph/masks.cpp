// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/graph/masks.hpp"

#include <algorithm>

#include "shiftlab/autodiff/ops.hpp"
#include "shiftlab/errors.hpp"

namespace shiftlab::graph {
namespace {

void check_unit_interval(const ad::Tensor& t, const char* what) {
  for (double v : t.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError(std::string(what) + " entry " + std::to_string(v) + " outside [0,1]");
  }
}

void check_aligned(const GraphBatch& b, const ad::Tensor& node, const ad::Tensor& edge) {
  if (node.size() != b.num_nodes()) {
    throw ContractError("node mask has " + std::to_string(node.size()) + " entries for " +
                        std::to_string(b.num_nodes()) + " nodes");
  }
  if (edge.size() != b.num_edges()) {
    throw ContractError("edge mask has " + std::to_string(edge.size()) + " entries for " +
                        std::to_string(b.num_edges()) + " edges");
  }
}

}  // namespace

MaskPair MaskPair::filled(const GraphBatch& b, double value) {
  return {ad::Tensor({b.num_nodes()}, value), ad::Tensor({b.num_edges()}, value)};
}

void MaskPair::validate(const GraphBatch& b) const {
  check_aligned(b, node_mask, edge_mask);
  check_unit_interval(node_mask, "node mask");
  check_unit_interval(edge_mask, "edge mask");
}

MaskVars to_vars(ad::Tape& tape, const MaskPair& masks, bool track) {
  return {tape.leaf(masks.node_mask, track), tape.leaf(masks.edge_mask, track)};
}

MaskedView compose_da_graph(const GraphBatch& b, const MaskVars& stable, const MaskVars& env_perturbed) {
  check_aligned(b, stable.node.value(), stable.edge.value());
  check_aligned(b, env_perturbed.node.value(), env_perturbed.edge.value());
  MaskVars eff{ad::clamp(stable.node + env_perturbed.node, 0.0, 1.0),
               ad::clamp(stable.edge + env_perturbed.edge, 0.0, 1.0)};
  return MaskedView::masked(b, eff);
}

MaskPair compose_masks(const MaskPair& stable, const MaskPair& env_perturbed) {
  if (stable.node_mask.size() != env_perturbed.node_mask.size() ||
      stable.edge_mask.size() != env_perturbed.edge_mask.size()) {
    throw ContractError("compose_masks: misaligned mask lengths");
  }
  MaskPair out = stable;
  for (std::size_t i = 0; i < out.node_mask.size(); ++i)
    out.node_mask[i] = std::clamp(stable.node_mask[i] + env_perturbed.node_mask[i], 0.0, 1.0);
  for (std::size_t i = 0; i < out.edge_mask.size(); ++i)
    out.edge_mask[i] = std::clamp(stable.edge_mask[i] + env_perturbed.edge_mask[i], 0.0, 1.0);
  return out;
}

std::pair<double, double> consistency_metrics(const GraphBatch& b, const MaskPair& draw_a, const MaskPair& draw_b) {
  draw_a.validate(b);
  draw_b.validate(b);
  double node_err = 0.0, edge_err = 0.0;
  for (std::size_t i = 0; i < b.num_nodes(); ++i) {
    const double d = draw_a.node_mask[i] - draw_b.node_mask[i];
    node_err += d * d;
  }
  for (std::size_t i = 0; i < b.num_edges(); ++i) {
    const double d = draw_a.edge_mask[i] - draw_b.edge_mask[i];
    edge_err += d * d;
  }
  const auto graphs = static_cast<double>(b.num_graphs());
  return {node_err / graphs, edge_err / graphs};
}

}  // namespace shiftlab::graph
