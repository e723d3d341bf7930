// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/objectives/losses.hpp"

#include <cmath>
#include <string>

#include "shiftlab/errors.hpp"

namespace shiftlab::obj {

using ad::Var;

namespace {

constexpr double kNormFloor = 1e-12;

Var unit_rows(Var x) {
  Var norm = ad::row_l2_norm(x, kNormFloor);
  Var inv = ad::div(x.tape()->constant(ad::Tensor(norm.shape(), 1.0)), norm);
  return ad::scale_rows(x, inv);
}

void require_same(const ad::Tensor& a, const ad::Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape " + ad::shape_str(a.shape()) + " vs " + ad::shape_str(b.shape()));
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(tau > 0.0)) throw ContractError("tau must be > 0");
  if (lambda < 0.0) throw ContractError("lambda must be >= 0");
  if (alpha_margin < 0.0) throw ContractError("alpha_margin must be >= 0");
  if (alpha_adv < 0.0) throw ContractError("alpha_adv must be >= 0");
  if (gamma < 0.0) throw ContractError("gamma must be >= 0");
}

void to_json(nlohmann::json& j, const LossWeights& w) {
  j = {{"tau", w.tau},
       {"lambda", w.lambda},
       {"alpha_margin", w.alpha_margin},
       {"alpha_adv", w.alpha_adv},
       {"gamma", w.gamma}};
}

void from_json(const nlohmann::json& j, LossWeights& w) {
  for (const auto& [key, value] : j.items()) {
    if (key == "tau") w.tau = value.get<double>();
    else if (key == "lambda") w.lambda = value.get<double>();
    else if (key == "alpha_margin") w.alpha_margin = value.get<double>();
    else if (key == "alpha_adv") w.alpha_adv = value.get<double>();
    else if (key == "gamma") w.gamma = value.get<double>();
    else throw ContractError("unknown loss weight '" + key + "'");
  }
}

void EmbeddingTriple::validate() const {
  const auto& s = h_s.value();
  require_same(s, h_e.value(), "h_e");
  require_same(s, h_da.value(), "h_da");
  require_same(s, h_o.value(), "h_o");
  require_same(s, h_o_drop.value(), "h_o_drop");
}

Var cosine_matrix(Var anchor, Var other) {
  if (anchor.value().cols() != other.value().cols()) throw DimensionError("cosine_matrix: width mismatch");
  return ad::matmul(unit_rows(anchor), ad::transpose(unit_rows(other)));
}

Var info_nce(Var anchor, Var positive, Var negatives, double tau) {
  if (!(tau > 0.0)) throw ContractError("info_nce: tau must be > 0");
  require_same(anchor.value(), positive.value(), "info_nce positive");
  const std::size_t b = anchor.value().rows();
  if (b == 0) throw ContractError("info_nce: empty batch");
  Var pos = ad::mul_scalar(ad::row_dot(unit_rows(anchor), unit_rows(positive)), 1.0 / tau);  // [B]
  Var neg = ad::mul_scalar(cosine_matrix(anchor, negatives), 1.0 / tau);                     // [B x B']
  Var all = ad::concat_cols(ad::reshape(pos, {b, 1}), neg);
  return ad::mean_all(ad::sub(ad::logsumexp_rows(all), pos));
}

Var cross_entropy(Var probs, std::span<const std::size_t> labels) {
  if (probs.value().rows() != labels.size()) throw DimensionError("cross_entropy: label count mismatch");
  if (labels.empty()) throw ContractError("cross_entropy: empty batch");
  return ad::neg(ad::mean_all(ad::log(ad::pick(probs, labels))));
}

Var stable_reg(Var pred_std, Var pred_da, std::span<const std::size_t> labels) {
  return ad::add(cross_entropy(pred_std, labels), cross_entropy(pred_da, labels));
}

Var stable_objective(const EmbeddingTriple& t, Var pred_std, Var pred_da, std::span<const std::size_t> labels,
                     const LossWeights& w, bool use_cl) {
  Var reg = stable_reg(pred_std, pred_da, labels);
  if (!use_cl || w.lambda == 0.0) return reg;
  return ad::add(reg, ad::mul_scalar(info_nce(t.h_da, t.h_s, t.h_e, w.tau), w.lambda));
}

Var triplet(Var h_o, Var h_o_drop, Var h_e, double alpha_margin) {
  require_same(h_o.value(), h_o_drop.value(), "triplet positive");
  require_same(h_o.value(), h_e.value(), "triplet negative");
  Var d_pos = ad::row_l2_norm(ad::sub(h_o, h_o_drop), kNormFloor);
  Var d_neg = ad::row_l2_norm(ad::sub(h_o, h_e), kNormFloor);
  return ad::mean_all(ad::relu(ad::add_scalar(ad::sub(d_pos, d_neg), alpha_margin)));
}

Var env_reg(const graph::MaskVars& masks) {
  Var m = ad::concat_rows(masks.node, masks.edge);
  if (m.value().size() == 0) throw ContractError("env_reg: no mask entries");
  Var one_minus = ad::rsub_scalar(1.0, m);
  Var entropy = ad::neg(ad::add(ad::mul(m, ad::log(m)), ad::mul(one_minus, ad::log(one_minus))));
  Var deviation = ad::square(ad::add_scalar(ad::mean_all(m), -kEnvTargetRatio));
  return ad::add(ad::mean_all(entropy), deviation);
}

Var adversarial_objective(Var sup_loss_da, Var triplet_loss, Var env_reg_loss, const LossWeights& w) {
  Var out = sup_loss_da;
  if (w.alpha_adv != 0.0) out = ad::sub(out, ad::mul_scalar(triplet_loss, w.alpha_adv));
  if (w.gamma != 0.0) out = ad::sub(out, ad::mul_scalar(env_reg_loss, w.gamma));
  return out;
}

}  // namespace shiftlab::obj
