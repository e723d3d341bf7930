// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "shiftlab/autodiff/ops.hpp"
#include "shiftlab/graph/masks.hpp"
#include "shiftlab/model/params.hpp"

namespace shiftlab::model {

ad::Var linear(ParamBinder& bind, const Linear& l, ad::Var x);
ad::Var mlp(ParamBinder& bind, const Mlp& m, ad::Var x);

/// Node states after all message-passing layers, [N x H]. A masked view scales
/// input features by the node mask and every message u->v by the mask of its
/// edge. ReLU follows every layer except the last.
ad::Var node_states(ParamBinder& bind, const EncoderParams& enc, const graph::MaskedView& view);

/// Mean readout of node_states, [B x H].
ad::Var encode(ParamBinder& bind, const EncoderParams& enc, const graph::MaskedView& view);

/// node = sigmoid(MLP1(z_i)) as [N]; edge = sigmoid((MLP2([z_u,z_v]) + MLP2([z_v,z_u])) / 2) as [E].
graph::MaskVars gen_masks(ParamBinder& bind, const MaskNetParams& net, const graph::GraphBatch& b);

/// 1 - M for both masks.
graph::MaskVars env_masks_from_stable(const graph::MaskVars& stable);
graph::MaskPair env_masks_from_stable(const graph::MaskPair& stable);

ad::Var logits(ParamBinder& bind, const ClassifierParams& clf, ad::Var embedding);
/// Row-wise softmax of the classifier logits, [B x C].
ad::Var classify(ParamBinder& bind, const ClassifierParams& clf, ad::Var embedding);

}  // namespace shiftlab::model
