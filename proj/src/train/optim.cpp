// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/train/optim.hpp"

#include <cmath>

#include "shiftlab/errors.hpp"

namespace shiftlab::train {

Adam::Adam(std::vector<ad::Tensor*> params, AdamSettings settings) : params_(std::move(params)), s_(settings) {
  if (!(s_.lr > 0.0) || s_.beta1 < 0.0 || s_.beta1 >= 1.0 || s_.beta2 < 0.0 || s_.beta2 >= 1.0 || !(s_.eps > 0.0)) {
    throw ContractError("Adam: lr > 0, betas in [0,1) and eps > 0 required");
  }
  for (const ad::Tensor* p : params_) {
    m_.emplace_back(p->shape(), 0.0);
    v_.emplace_back(p->shape(), 0.0);
  }
}

void Adam::step(const std::vector<ad::Tensor>& grads) {
  if (grads.size() != params_.size()) throw DimensionError("Adam: gradient count does not match parameter count");
  ++t_;
  const double c1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    ad::Tensor& p = *params_[k];
    const ad::Tensor& g = grads[k];
    if (g.shape() != p.shape()) throw DimensionError("Adam: gradient shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      m_[k][i] = s_.beta1 * m_[k][i] + (1.0 - s_.beta1) * g[i];
      v_[k][i] = s_.beta2 * v_[k][i] + (1.0 - s_.beta2) * g[i] * g[i];
      const double m_hat = m_[k][i] / c1;
      const double v_hat = v_[k][i] / c2;
      p[i] -= s_.lr * m_hat / (std::sqrt(v_hat) + s_.eps);
    }
  }
}

double clip_global_norm(std::vector<ad::Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& g : grads)
      for (double& v : g.storage()) v *= scale;
  }
  return norm;
}

}  // namespace shiftlab::train
