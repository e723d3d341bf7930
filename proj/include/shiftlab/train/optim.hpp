// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "shiftlab/autodiff/tensor.hpp"

namespace shiftlab::train {

struct AdamSettings {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamSettings&) const = default;
};

/// Adam over a fixed list of parameter tensors. The tensors are owned
/// elsewhere and must outlive the optimizer.
class Adam {
 public:
  Adam(std::vector<ad::Tensor*> params, AdamSettings settings);

  /// Descends along `grads` (aligned with the parameter list).
  void step(const std::vector<ad::Tensor>& grads);

  std::size_t steps() const { return t_; }
  const std::vector<ad::Tensor*>& params() const { return params_; }

 private:
  std::vector<ad::Tensor*> params_;
  AdamSettings s_;
  std::vector<ad::Tensor> m_;
  std::vector<ad::Tensor> v_;
  std::size_t t_ = 0;
};

/// Scales all gradients so their joint L2 norm is at most max_norm. Returns the
/// norm before clipping.
double clip_global_norm(std::vector<ad::Tensor>& grads, double max_norm);

}  // namespace shiftlab::train
