// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace shiftlab::ad {

std::vector<Tensor> analytic_gradients(const LossBuilder& f, std::span<const Tensor> params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(tape.leaf(p, true));
  Var loss = f(tape, leaves);
  Gradients grads = tape.backward(loss);
  std::vector<Tensor> out;
  out.reserve(leaves.size());
  for (const Var& v : leaves) out.push_back(std::move(grads.at(v.id())));
  return out;
}

double evaluate(const LossBuilder& f, std::span<const Tensor> params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(tape.constant(p));
  return f(tape, leaves).value().item();
}

GradCheckResult grad_check(const LossBuilder& f, std::span<const Tensor> params, double step) {
  const std::vector<Tensor> analytic = analytic_gradients(f, params);
  std::vector<Tensor> work(params.begin(), params.end());
  GradCheckResult result;
  for (std::size_t p = 0; p < work.size(); ++p) {
    for (std::size_t i = 0; i < work[p].size(); ++i) {
      const double orig = work[p][i];
      work[p][i] = orig + step;
      const double up = evaluate(f, work);
      work[p][i] = orig - step;
      const double down = evaluate(f, work);
      work[p][i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[p][i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      ++result.checked;
      if (err > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = std::max(err, result.max_rel_error);
        result.worst_param = p;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace shiftlab::ad
