// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>

#include "shiftlab/autodiff/tape.hpp"
#include "shiftlab/graph/graph.hpp"

namespace shiftlab::graph {

/// Soft node mask (one entry per batch node) and soft edge mask (one entry per
/// batch edge, aligned with GraphBatch::edges). Entries lie in [0, 1].
struct MaskPair {
  ad::Tensor node_mask;
  ad::Tensor edge_mask;

  static MaskPair filled(const GraphBatch& b, double value);
  void validate(const GraphBatch& b) const;
};

/// Differentiable counterpart of MaskPair, recorded on a tape.
struct MaskVars {
  ad::Var node;
  ad::Var edge;

  MaskPair values() const { return {node.value(), edge.value()}; }
};

MaskVars to_vars(ad::Tape& tape, const MaskPair& masks, bool track = false);

/// A batch seen through masks: node features scaled row-wise by the node mask,
/// messages scaled per edge by the edge mask. No masks means the raw batch.
struct MaskedView {
  const GraphBatch* base = nullptr;
  std::optional<MaskVars> masks;

  static MaskedView raw(const GraphBatch& b) { return {&b, std::nullopt}; }
  static MaskedView masked(const GraphBatch& b, MaskVars m) { return {&b, m}; }
};

/// Effective masks clamp(stable + env_perturbed, 0, 1): the augmented graph.
MaskedView compose_da_graph(const GraphBatch& b, const MaskVars& stable, const MaskVars& env_perturbed);
MaskPair compose_masks(const MaskPair& stable, const MaskPair& env_perturbed);

/// Squared Frobenius distance between two draws of the stable masks,
/// summed over the batch and divided by the number of graphs.
/// Returns (node_err, edge_err).
std::pair<double, double> consistency_metrics(const GraphBatch& b, const MaskPair& draw_a, const MaskPair& draw_b);

}  // namespace shiftlab::graph
