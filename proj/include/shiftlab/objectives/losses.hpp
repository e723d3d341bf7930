// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "json.hpp"
#include "shiftlab/autodiff/ops.hpp"
#include "shiftlab/graph/masks.hpp"

namespace shiftlab::obj {

struct LossWeights {
  double tau = 0.5;
  double lambda = 1.0;
  double alpha_margin = 0.5;
  double alpha_adv = 0.5;
  double gamma = 0.5;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

void to_json(nlohmann::json& j, const LossWeights& w);
void from_json(const nlohmann::json& j, LossWeights& w);

/// Embeddings of one batch under every view; all are [B x H].
struct EmbeddingTriple {
  ad::Var h_s;
  ad::Var h_e;
  ad::Var h_da;
  ad::Var h_o;
  ad::Var h_o_drop;

  void validate() const;
};

/// Cosine similarity of every anchor row with every row of `other`, [B x B'].
ad::Var cosine_matrix(ad::Var anchor, ad::Var other);

/// Contrastive loss with positive pair (anchor_i, positive_i) and every row of
/// `negatives` as a negative for every anchor. Norms are floored at 1e-12.
ad::Var info_nce(ad::Var anchor, ad::Var positive, ad::Var negatives, double tau);

/// Mean negative log-likelihood of probability rows.
ad::Var cross_entropy(ad::Var probs, std::span<const std::size_t> labels);

/// cross_entropy(pred_std) + cross_entropy(pred_da).
ad::Var stable_reg(ad::Var pred_std, ad::Var pred_da, std::span<const std::size_t> labels);

/// stable_reg + lambda * info_nce(h_da, h_s, h_e). use_cl = false drops the contrastive term.
ad::Var stable_objective(const EmbeddingTriple& t, ad::Var pred_std, ad::Var pred_da,
                         std::span<const std::size_t> labels, const LossWeights& w, bool use_cl = true);

/// mean_i max(0, |h_o - h_o'|_2 - |h_o - h_e|_2 + margin)
ad::Var triplet(ad::Var h_o, ad::Var h_o_drop, ad::Var h_e, double alpha_margin);

/// Target mask ratio of the environment regularizer.
inline constexpr double kEnvTargetRatio = 0.5;

/// Mean binary entropy over all node and edge mask entries plus
/// (mean mask value - 0.5)^2.
ad::Var env_reg(const graph::MaskVars& masks);

/// sup_loss_da - alpha_adv * triplet - gamma * env_reg; the augmenter ascends it.
ad::Var adversarial_objective(ad::Var sup_loss_da, ad::Var triplet_loss, ad::Var env_reg_loss, const LossWeights& w);

}  // namespace shiftlab::obj
