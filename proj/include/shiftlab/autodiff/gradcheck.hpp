// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "shiftlab/autodiff/tape.hpp"

namespace shiftlab::ad {

/// Builds a scalar loss on `tape` from one Var per parameter tensor.
using LossBuilder = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares backward() against central differences over every element of
/// every parameter. Error is |analytic - numeric| / max(1, |numeric|).
/// `f` must be deterministic (freeze dropout seeds).
GradCheckResult grad_check(const LossBuilder& f, std::span<const Tensor> params, double step = 1e-6);

/// Analytic gradients of `f` at `params`, one tensor per parameter.
std::vector<Tensor> analytic_gradients(const LossBuilder& f, std::span<const Tensor> params);

double evaluate(const LossBuilder& f, std::span<const Tensor> params);

}  // namespace shiftlab::ad
