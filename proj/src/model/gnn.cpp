// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/model/gnn.hpp"

#include <string>

#include "shiftlab/errors.hpp"

namespace shiftlab::model {

using ad::Var;

Var linear(ParamBinder& bind, const Linear& l, Var x) {
  return ad::add(ad::matmul(x, bind(l.weight)), bind(l.bias));
}

Var mlp(ParamBinder& bind, const Mlp& m, Var x) { return linear(bind, m.out, ad::relu(linear(bind, m.hidden, x))); }

Var node_states(ParamBinder& bind, const EncoderParams& enc, const graph::MaskedView& view) {
  if (view.base == nullptr) throw ContractError("node_states: view has no batch");
  const graph::GraphBatch& b = *view.base;
  if (enc.layers.empty()) throw ContractError("node_states: encoder has no layers");
  const std::size_t in_dim = enc.layers.front().hidden.weight.rows();
  if (b.feature_dim() != in_dim) {
    throw ContractError("node_states: batch feature dim " + std::to_string(b.feature_dim()) +
                        " does not match encoder input dim " + std::to_string(in_dim));
  }
  ad::Tape& tape = bind.tape();
  Var h = tape.constant(b.x);
  Var arc_mask;
  if (view.masks) {
    h = ad::scale_rows(h, view.masks->node);
    // Arcs [0,E) are u->v and [E,2E) are v->u; both carry the edge's mask.
    arc_mask = ad::concat_rows(view.masks->edge, view.masks->edge);
  }
  const std::size_t n = b.num_nodes();
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    Var msg = ad::gather_rows(h, b.arc_src);
    if (view.masks) msg = ad::scale_rows(msg, arc_mask);
    Var agg = ad::add(h, ad::scatter_sum(msg, b.arc_dst, n));
    h = mlp(bind, enc.layers[l], agg);
    if (l + 1 < enc.layers.size()) h = ad::relu(h);
  }
  return h;
}

Var encode(ParamBinder& bind, const EncoderParams& enc, const graph::MaskedView& view) {
  const graph::GraphBatch& b = *view.base;
  Var h = node_states(bind, enc, view);
  Var pooled = ad::scatter_sum(h, b.graph_id, b.num_graphs());
  ad::Tensor inv({b.num_graphs()});
  for (std::size_t g = 0; g < b.num_graphs(); ++g) {
    const std::size_t count = b.nodes_in(g);
    if (count == 0) throw ContractError("encode: graph " + std::to_string(g) + " has no nodes");
    inv[g] = 1.0 / static_cast<double>(count);
  }
  return ad::scale_rows(pooled, bind.tape().constant(std::move(inv)));
}

graph::MaskVars gen_masks(ParamBinder& bind, const MaskNetParams& net, const graph::GraphBatch& b) {
  Var z = node_states(bind, net.encoder, graph::MaskedView::raw(b));
  const std::size_t n = b.num_nodes(), e = b.num_edges();
  Var node = ad::reshape(ad::sigmoid(mlp(bind, net.node_head, z)), {n});

  std::vector<std::size_t> us(e), vs(e);
  for (std::size_t i = 0; i < e; ++i) {
    us[i] = b.edges[i].first;
    vs[i] = b.edges[i].second;
  }
  Var zu = ad::gather_rows(z, us);
  Var zv = ad::gather_rows(z, vs);
  Var forward = mlp(bind, net.edge_head, ad::concat_cols(zu, zv));
  Var backward = mlp(bind, net.edge_head, ad::concat_cols(zv, zu));
  Var edge = ad::reshape(ad::sigmoid(ad::mul_scalar(ad::add(forward, backward), 0.5)), {e});
  return {node, edge};
}

graph::MaskVars env_masks_from_stable(const graph::MaskVars& stable) {
  return {ad::rsub_scalar(1.0, stable.node), ad::rsub_scalar(1.0, stable.edge)};
}

graph::MaskPair env_masks_from_stable(const graph::MaskPair& stable) {
  graph::MaskPair out{stable.node_mask, stable.edge_mask};
  for (double& v : out.node_mask.storage()) v = 1.0 - v;
  for (double& v : out.edge_mask.storage()) v = 1.0 - v;
  return out;
}

Var logits(ParamBinder& bind, const ClassifierParams& clf, Var embedding) {
  const std::size_t width = clf.head.weight.rows();
  if (embedding.value().cols() != width) {
    throw ContractError("classify: embedding width " + std::to_string(embedding.value().cols()) +
                        " does not match classifier width " + std::to_string(width));
  }
  return linear(bind, clf.head, embedding);
}

Var classify(ParamBinder& bind, const ClassifierParams& clf, Var embedding) {
  return ad::softmax_rows(logits(bind, clf, embedding));
}

}  // namespace shiftlab::model
